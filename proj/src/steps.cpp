#include "km/steps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "km/error.hpp"
#include "km/fourier.hpp"
#include "km/rng.hpp"

namespace km {

namespace {

constexpr double kRel = 1e-12;

void require_same(const Group& a, const Group& b) {
  if (!(a == b)) throw GroupMismatch();
}

GSet threshold_set(const FuncR& f, double t, bool strict) {
  GSet s(f.group());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (strict ? f[i] > t : f[i] >= t) s.insert(i);
  }
  return s;
}

}  // namespace

const char* to_string(LiftVariant v) { return v == LiftVariant::NearUniform ? "NearUniform" : "Lp"; }
const char* to_string(IncrementVariant v) {
  return v == IncrementVariant::NearUniform ? "NearUniform" : "Increment";
}
const char* to_string(NarrowVariant v) {
  switch (v) {
    case NarrowVariant::IncOnBprime: return "IncOnBprime";
    case NarrowVariant::IncOnBdoubleprime: return "IncOnBdoubleprime";
    case NarrowVariant::Translate: return "Translate";
  }
  return "?";
}

// ---------------------------------------------------------------------------

LiftOutcome holder_lift(const GSet& a, const GSet& c, double eps, const Constants& k, const BohrContext* ctx) {
  if (a.empty() || c.empty()) throw DomainError("holder_lift needs nonempty A and C");
  require_same(a.group(), c.group());
  const Group& g = a.group();
  const ProbMeasure mu_a = mu_of_set(a);
  const ProbMeasure mu_c = mu_of_set(c);

  LiftOutcome out{};
  out.inner_value = inner(conv(mu_a, mu_a), mu_c);

  FuncR f;
  FuncR w = FuncR::constant_exact(g, 1);
  double gamma;
  if (ctx == nullptr) {
    out.target = 1.0;
    gamma = c.density();
    f = conv(mu_a, mu_a).plus_constant_exact(-1, 1);
  } else {
    const BohrSet& b = *ctx->b;
    const BohrSet& bp = *ctx->bp;
    require_same(g, b.group());
    if (!a.subset_of(b.members())) throw HypothesisViolation("holder_lift: A is not inside B");
    if (!c.subset_of(bp.members())) throw HypothesisViolation("holder_lift: C is not inside B'");
    const double alpha = static_cast<double>(a.card()) / static_cast<double>(b.size());
    const double rho = k.c_bohr * eps * alpha / static_cast<double>(std::max<std::size_t>(b.rank(), 1));
    if (!bp.members().subset_of(dilate(b, rho).members())) {
      throw HypothesisViolation("holder_lift: B' is not inside B_rho with rho = " + std::to_string(rho));
    }
    out.target = static_cast<double>(g.size()) / static_cast<double>(b.size());
    gamma = static_cast<double>(c.card()) / static_cast<double>(bp.size());
    const FuncR diff = FuncR(mu_a) - FuncR(mu_of_set(b.members()));
    f = conv(diff, diff);
    w = mu_of_set(bp.members()).func();
  }
  out.p_bound = 2 * static_cast<int>(std::ceil(k.k_hold * std::log(2.0 / gamma)));
  if (std::abs(out.inner_value - out.target) <= eps * out.target * (1 + kRel)) {
    out.variant = LiftVariant::NearUniform;
    return out;
  }
  for (int p = 2; p <= std::max(out.p_bound, 2); p += 2) {
    const double n = lp_norm(f, p, w);
    if (n >= 0.5 * eps * out.target * (1 - kRel)) {
      out.variant = LiftVariant::Lp;
      out.p = p;
      out.norm_value = n;
      return out;
    }
  }
  throw ConstantBustingInstance("k_hold", "holder_lift: no even p <= " + std::to_string(out.p_bound) +
                                              " reaches eps/2 (inner " + std::to_string(out.inner_value) + ")");
}

// ---------------------------------------------------------------------------

int unbalance_bound(double eps, int p, const Constants& k) {
  return static_cast<int>(std::ceil(k.k_unb / eps * std::log(std::numbers::e / eps) * p - 1e-9));
}

namespace {

int search_limit(int bound) { return std::max(bound, 1) * 16 + 64; }

}  // namespace

UnbalanceOutcome unbalance(const FuncR& f, const FuncR& nu, double eps, int p, const Constants& k,
                           bool enforce_bound) {
  require_same(f.group(), nu.group());
  if (p < 1) throw DomainError("unbalance needs p >= 1");
  if (spectral_min(f).min_re < -1e-8) throw DomainError("unbalance: f has a negative Fourier coefficient");
  if (spectral_min(nu).min_re < -1e-8) throw DomainError("unbalance: nu has a negative Fourier coefficient");
  const double fn = lp_norm(f, p, nu);
  if (fn < eps * (1 - kRel)) {
    throw DomainError("unbalance: ||f||_p = " + std::to_string(fn) + " is below eps = " + std::to_string(eps));
  }
  const int bound = unbalance_bound(eps, p, k);
  const FuncR g = f.plus_constant_exact(1, 1);
  const double target = 1.0 + 0.5 * eps;
  for (int q = 1; q <= search_limit(bound); ++q) {
    const double n = lp_norm(g, q, nu);
    if (n >= target * (1 - kRel)) {
      if (enforce_bound && q > bound) {
        throw ConstantBustingInstance("k_unb", "unbalance: p' = " + std::to_string(q) + " exceeds bound " +
                                                   std::to_string(bound));
      }
      return {q, n, bound};
    }
  }
  throw ConstantBustingInstance("k_unb", "unbalance: no p' up to " + std::to_string(search_limit(bound)));
}

BohrUnbalanceOutcome bohr_unbalance(const GSet& a, const BohrSet& b, const FuncR& nu, double eps, int p,
                                    const Constants& k, bool enforce_bound) {
  require_same(a.group(), b.group());
  require_same(a.group(), nu.group());
  if (a.empty()) throw DomainError("bohr_unbalance needs nonempty A");
  if (!a.subset_of(b.members())) throw HypothesisViolation("bohr_unbalance: A is not inside B");
  const Group& g = a.group();
  const double alpha = static_cast<double>(a.card()) / static_cast<double>(b.size());
  const double rho = k.c_bohr * eps * alpha / static_cast<double>(std::max<std::size_t>(b.rank(), 1));
  if (!nu.support().subset_of(dilate(b, rho).members())) {
    throw HypothesisViolation("bohr_unbalance: nu is not supported on B_rho with rho = " + std::to_string(rho));
  }
  if (spectral_min(nu).min_re < -1e-8) throw HypothesisViolation("bohr_unbalance: nu^ is not nonnegative");
  const double mu_b = static_cast<double>(b.size()) / static_cast<double>(g.size());
  const ProbMeasure mu_a = mu_of_set(a);
  const FuncR diff = FuncR(mu_a) - FuncR(mu_of_set(b.members()));
  const FuncR f = diffconv(diff, diff).scaled(mu_b);
  const double fn = lp_norm(f, p, nu);
  if (fn < eps * (1 - kRel)) {
    throw DomainError("bohr_unbalance: ||f||_p = " + std::to_string(fn) + " is below eps");
  }
  const FuncR aa = diffconv(mu_a, mu_a);
  const int bound = unbalance_bound(eps, p, k);
  const double target = (1.0 + 0.25 * eps) / mu_b;
  for (int q = 1; q <= search_limit(bound); ++q) {
    const double n = lp_norm(aa, q, nu);
    if (n >= target * (1 - kRel)) {
      if (enforce_bound && q > bound) {
        throw ConstantBustingInstance("k_unb", "bohr_unbalance: p' = " + std::to_string(q) + " exceeds bound " +
                                                   std::to_string(bound));
      }
      return {q, n, target, bound};
    }
  }
  throw ConstantBustingInstance("c_bohr", "bohr_unbalance: no p' reaches (1 + eps/4) mu(B)^-1");
}

// ---------------------------------------------------------------------------

GSet drc_set(const GSet& b, const GSet& a, const std::vector<std::size_t>& shifts) {
  GSet out = b;
  for (auto s : shifts) out &= a.translate(s);
  return out;
}

double diffconv_pairing(const GSet& x, const GSet& y, const FuncR& f) {
  require_same(x.group(), y.group());
  if (x.empty() || y.empty()) throw DomainError("mu of an empty set");
  const Group& g = x.group();
  const auto xs = x.indices();
  const auto ys = y.indices();
  double acc = 0.0;
  for (auto b : ys) {
    double row = 0.0;
    for (auto a : xs) row += f[g.sub(b, a)];
    acc += row;
  }
  return acc / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

namespace {

struct DrcContext {
  const GSet& b1;
  const GSet& b2;
  const FuncR& f;
  std::vector<GSet> translates;  // A + s for every s
  double eta;
  double bound;
  double best_f_margin = -1e300;
  double best_density_margin = -1e300;
};

// Evaluates s; fills `out` and returns true when both conclusions hold.
bool try_shifts(DrcContext& ctx, const std::vector<std::size_t>& s, DrcResult& out) {
  GSet a1 = ctx.b1;
  GSet a2 = ctx.b2;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::size_t t = s[j];
    if (j > 0 && t == s[j - 1]) continue;
    a1 &= ctx.translates[t];
    a2 &= ctx.translates[t];
    if (a1.empty() || a2.empty()) return false;
  }
  const double prod = static_cast<double>(a1.card()) / static_cast<double>(ctx.b1.card()) *
                      static_cast<double>(a2.card()) / static_cast<double>(ctx.b2.card());
  ctx.best_density_margin = std::max(ctx.best_density_margin, prod - ctx.bound);
  if (prod < ctx.bound * (1 - kRel)) return false;
  const double fv = diffconv_pairing(a1, a2, ctx.f);
  ctx.best_f_margin = std::max(ctx.best_f_margin, 2 * ctx.eta - fv);
  if (fv > 2 * ctx.eta + kRel * std::max(1.0, std::abs(ctx.eta))) return false;
  out.shifts = s;
  out.a1 = std::move(a1);
  out.a2 = std::move(a2);
  out.f_value = fv;
  out.density_product = prod;
  return true;
}

}  // namespace

DrcResult drc(const GSet& a, const GSet& b1, const GSet& b2, int p, const FuncR& f, const ShiftSearch& search) {
  if (a.empty() || b1.empty() || b2.empty()) throw DomainError("drc needs nonempty A, B1, B2");
  if (p < 1) throw DomainError("drc needs p >= 1");
  require_same(a.group(), b1.group());
  require_same(a.group(), b2.group());
  require_same(a.group(), f.group());
  const Group& g = a.group();
  const std::size_t n = g.size();

  const ProbMeasure mu_a = mu_of_set(a);
  const FuncR aa = diffconv(mu_a, mu_a);
  const FuncR mu = diffconv(mu_of_set(b1), mu_of_set(b2));
  DrcResult out{};
  out.norm_p = lp_norm(aa, p, mu);
  if (out.norm_p == 0.0) throw HypothesisViolation("drc: mu_A o mu_A vanishes on supp(mu_B1 o mu_B2)");
  // eta with aa normalized by its max on supp mu so the p-th powers stay finite.
  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] != 0.0) top = std::max(top, aa[i]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] == 0.0 || aa[i] == 0.0) continue;
    const double w = mu[i] * std::pow(aa[i] / top, p);
    num += w * f[i];
    den += w;
  }
  out.eta = num / den;
  out.density_bound = 0.25 * std::pow(a.density() * out.norm_p, 2.0 * p);

  DrcContext ctx{b1, b2, f, {}, out.eta, out.density_bound};
  ctx.translates.reserve(n);
  for (std::size_t s = 0; s < n; ++s) ctx.translates.push_back(a.translate(s));

  const auto up = static_cast<std::size_t>(p);
  std::uint64_t scanned = 0;
  if (search.mode == ShiftSearch::Sampled) {
    Rng rng(search.seed);
    std::vector<std::size_t> s(up);
    for (std::uint64_t t = 0; t < search.trials; ++t) {
      for (auto& x : s) x = static_cast<std::size_t>(rng.below(n));
      ++scanned;
      if (try_shifts(ctx, s, out)) {
        out.scanned = scanned;
        return out;
      }
    }
  } else {
    long double tuples = 1;
    for (std::size_t i = 0; i < up && tuples <= search.max_scan; ++i) tuples *= static_cast<long double>(n);
    if (tuples <= static_cast<long double>(search.max_scan)) {
      // Every s in G^p, lexicographic.
      std::vector<std::size_t> s(up, 0);
      while (true) {
        ++scanned;
        if (try_shifts(ctx, s, out)) {
          out.scanned = scanned;
          return out;
        }
        std::size_t j = up;
        while (j > 0 && ++s[j - 1] == n) s[--j] = 0;
        if (j == 0) break;
      }
    } else {
      // A_i(s) only depends on the set {s_j}; scan shift sets by size.
      const std::size_t kmax = std::min(up, n);
      for (std::size_t size = 1; size <= kmax && scanned < search.max_scan; ++size) {
        std::vector<std::size_t> comb(size);
        for (std::size_t i = 0; i < size; ++i) comb[i] = i;
        while (scanned < search.max_scan) {
          ++scanned;
          std::vector<std::size_t> s(comb);
          s.resize(up, comb.back());
          if (try_shifts(ctx, s, out)) {
            out.scanned = scanned;
            return out;
          }
          std::size_t i = size;
          while (i > 0 && comb[i - 1] == n - size + i - 1) --i;
          if (i == 0) break;
          ++comb[i - 1];
          for (std::size_t j = i; j < size; ++j) comb[j] = comb[j - 1] + 1;
        }
      }
    }
  }
  throw SiftExhausted("drc: no certified shift vector after " + std::to_string(scanned) + " candidates",
                      ctx.best_f_margin, ctx.best_density_margin);
}

SiftResult sift(const GSet& a, const GSet& b1, const GSet& b2, int p, double eps, double delta,
                const ShiftSearch& search) {
  if (a.empty() || b1.empty() || b2.empty()) throw DomainError("sift needs nonempty A, B1, B2");
  if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1)) throw DomainError("sift needs eps, delta in (0,1)");
  const ProbMeasure mu_a = mu_of_set(a);
  const FuncR aa = diffconv(mu_a, mu_a);
  const FuncR mu = diffconv(mu_of_set(b1), mu_of_set(b2));
  const double np = lp_norm(aa, p, mu);
  SiftResult out{};
  out.s = threshold_set(aa, (1 - eps) * np, true);
  out.p_used = p + static_cast<int>(std::ceil(std::log(2.0 / delta) / eps));
  const FuncR f = FuncR::indicator(out.s.complement());
  out.drc = drc(a, b1, b2, out.p_used, f, search);
  out.inner_value = diffconv_pairing(out.drc.a1, out.drc.a2, FuncR::indicator(out.s));
  if (out.inner_value < 1 - delta - 1e-12) {
    throw InternalError("sift: certified shifts give inner product " + std::to_string(out.inner_value) +
                        " < 1 - delta");
  }
  return out;
}

// ---------------------------------------------------------------------------

Subspace subspace_from_checks(const Group& g, std::vector<std::vector<std::uint32_t>> checks) {
  std::vector<std::size_t> freqs;
  for (const auto& row : checks) freqs.push_back(g.index(Element{row}));
  std::vector<double> widths(freqs.size(), 0.0);
  return Subspace{std::move(checks), bohr_build(g, std::move(freqs), std::move(widths))};
}

namespace {

// Calls visit(rows) for every k x n RREF matrix over F_q of rank k, in
// lexicographic order of (pivot set, free entries). Stops when visit
// returns true.
template <class Visit>
bool for_each_rref(std::size_t n, std::size_t k, std::uint32_t q, Visit&& visit) {
  std::vector<std::size_t> piv(k);
  for (std::size_t i = 0; i < k; ++i) piv[i] = i;
  while (true) {
    std::vector<std::pair<std::size_t, std::size_t>> free;  // (row, col)
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t c = piv[i] + 1; c < n; ++c) {
        if (std::find(piv.begin(), piv.end(), c) == piv.end()) free.emplace_back(i, c);
      }
    }
    std::vector<std::uint32_t> val(free.size(), 0);
    while (true) {
      std::vector<std::vector<std::uint32_t>> rows(k, std::vector<std::uint32_t>(n, 0));
      for (std::size_t i = 0; i < k; ++i) rows[i][piv[i]] = 1;
      for (std::size_t t = 0; t < free.size(); ++t) rows[free[t].first][free[t].second] = val[t];
      if (visit(rows)) return true;
      std::size_t t = free.size();
      while (t > 0 && ++val[t - 1] == q) val[--t] = 0;
      if (t == 0) break;
    }
    if (k == 0) return false;
    std::size_t i = k;
    while (i > 0 && piv[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++piv[i - 1];
    for (std::size_t j = i; j < k; ++j) piv[j] = piv[j - 1] + 1;
  }
}

}  // namespace

std::optional<SmoothingSubspace> find_smoothing_subspace(const GSet& a1, const GSet& a2, const GSet& s, double eps,
                                                         std::size_t codim_max) {
  require_same(a1.group(), a2.group());
  require_same(a1.group(), s.group());
  const Group& g = a1.group();
  const std::uint32_t q = g.prime_field();
  if (q == 0) throw DomainError("find_smoothing_subspace needs a group Z_q^n with q prime");
  if (a1.empty() || a2.empty()) throw DomainError("find_smoothing_subspace needs nonempty A1, A2");
  const std::size_t n = g.rank();
  const FuncR h = diffconv(mu_of_set(a1), mu_of_set(a2));
  const double base = inner(h, FuncR::indicator(s));

  std::vector<Element> elems(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) elems[x] = g.element(x);

  std::optional<SmoothingSubspace> hit;
  std::uint64_t examined = 0;
  for (std::size_t k = 0; k <= std::min(codim_max, n) && !hit; ++k) {
    std::size_t cosets = 1;
    for (std::size_t i = 0; i < k; ++i) cosets *= q;
    std::vector<double> hs(cosets);
    std::vector<double> sc(cosets);
    for_each_rref(n, k, q, [&](const std::vector<std::vector<std::uint32_t>>& rows) {
      ++examined;
      std::fill(hs.begin(), hs.end(), 0.0);
      std::fill(sc.begin(), sc.end(), 0.0);
      for (std::size_t x = 0; x < g.size(); ++x) {
        std::size_t syn = 0;
        for (std::size_t i = 0; i < k; ++i) {
          std::uint64_t dot = 0;
          for (std::size_t j = 0; j < n; ++j) dot += static_cast<std::uint64_t>(rows[i][j]) * elems[x].coords[j];
          syn = syn * q + dot % q;
        }
        hs[syn] += h[x];
        if (s.contains(x)) sc[syn] += 1.0;
      }
      const double vsize = static_cast<double>(g.size() / cosets);
      double smoothed = 0.0;
      for (std::size_t c = 0; c < cosets; ++c) smoothed += sc[c] * hs[c];
      smoothed /= vsize * static_cast<double>(g.size());
      if (std::abs(smoothed - base) <= eps + kRel) {
        hit = SmoothingSubspace{subspace_from_checks(g, rows), base, smoothed, examined};
        return true;
      }
      return false;
    });
  }
  if (hit) hit->examined = examined;
  return hit;
}

SmoothingBohr find_smoothing_bohr(const BohrSet& b, const BohrSet& bp, const GSet& a1, const GSet& a2,
                                  const GSet& s, double eps, const SmoothingBudget& budget, double reg_const) {
  const Group& g = b.group();
  require_same(g, bp.group());
  require_same(g, a1.group());
  require_same(g, a2.group());
  require_same(g, s.group());
  if (a1.empty() || a2.empty()) throw DomainError("find_smoothing_bohr needs nonempty A1, A2");
  if (!a1.subset_of(b.members())) throw HypothesisViolation("find_smoothing_bohr: A1 is not inside B");
  if (s.card() > 2 * b.size()) throw HypothesisViolation("find_smoothing_bohr: |S| > 2|B|");
  {
    // A2 inside B' - x for some x: x = y - a for every a in A2 and some y in B'.
    bool ok = false;
    const std::size_t a0 = a2.indices().front();
    for (auto y : bp.members().indices()) {
      const std::size_t x = g.sub(y, a0);
      if (a2.translate(x).subset_of(bp.members())) {
        ok = true;
        break;
      }
    }
    if (!ok) throw HypothesisViolation("find_smoothing_bohr: A2 is not inside a translate of B'");
  }

  const FuncR h = diffconv(mu_of_set(a1), mu_of_set(a2));
  const FuncR one_s = FuncR::indicator(s);
  SmoothingBohr out{};
  out.base = inner(h, one_s);
  out.best_margin = -1e300;

  auto test = [&](const BohrSet& cand) {
    ++out.candidates;
    const double sm = inner(conv(mu_of_set(cand.members()), h), one_s);
    const double margin = eps - std::abs(sm - out.base);
    if (margin > out.best_margin) {
      out.best_margin = margin;
      out.smoothed = sm;
    }
    if (margin >= -kRel) {
      out.found = cand;
      out.smoothed = sm;
      out.best_margin = margin;
      return true;
    }
    return false;
  };

  if (bp.size() >= budget.min_size && test(bp)) return out;

  // Nontrivial characters ranked by |mu_A1^|, ties by index.
  const FuncC spec = dft(FuncR(mu_of_set(a1)));
  std::vector<std::size_t> order;
  for (std::size_t i = 1; i < g.size(); ++i) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return std::abs(spec[x]) > std::abs(spec[y]); });

  for (std::size_t m = 1; m <= std::min(budget.freqs, order.size()); ++m) {
    std::vector<std::size_t> freqs(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    double w = 2.0;
    for (std::size_t j = 0; j < budget.widths; ++j, w *= 0.5) {
      const BohrSet extra = bohr_build(g, freqs, std::vector<double>(m, w));
      const BohrSet joined = join(bp, extra);
      BohrSet cand = regular_dilate(joined, reg_const).set;
      if (cand.size() < budget.min_size) break;
      if (test(cand)) return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> translate_densities(const GSet& a, const GSet& x) {
  require_same(a.group(), x.group());
  if (x.empty()) throw DomainError("translate_densities needs nonempty X");
  const Group& g = a.group();
  std::vector<std::uint32_t> count(g.size(), 0);
  const auto as = a.indices();
  for (auto b : x.indices()) {
    for (auto y : as) ++count[g.sub(y, b)];
  }
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(count[i]) / static_cast<double>(x.card());
  return out;
}

CosetDensity best_coset(const GSet& a, const GSet& v) {
  const auto d = translate_densities(a, v);
  const auto it = std::max_element(d.begin(), d.end());
  return {static_cast<std::size_t>(it - d.begin()), *it};
}

IncrementOutcome density_increment_step(const GSet& a, const GSet& c, double eps, const IncrementConfig& cfg,
                                        const Constants& k) {
  if (a.empty() || c.empty()) throw DomainError("density_increment_step needs nonempty A and C");
  require_same(a.group(), c.group());
  const Group& g = a.group();
  if (g.size() > 1) {
    const std::uint32_t q = g.prime_field();
    if (q == 0 || q == 2) throw DomainError("density_increment_step needs Z_q^n with q an odd prime");
  }
  IncrementOutcome out{};
  out.alpha = a.density();
  out.lift = holder_lift(a, c, eps, k);
  if (out.lift.variant == LiftVariant::NearUniform) {
    out.variant = IncrementVariant::NearUniform;
    return out;
  }
  const ProbMeasure mu_a = mu_of_set(a);
  const FuncR aa = diffconv(mu_a, mu_a);
  out.unbalanced = unbalance(aa.plus_constant_exact(-1, 1), FuncR::constant_exact(g, 1), eps / 2, out.lift.p, k);

  const GSet whole = GSet::full(g);
  ShiftSearch search;
  search.mode = ShiftSearch::Exhaustive;
  search.max_scan = cfg.max_scan;
  const double eps_s = (eps / 8) / (1 + eps / 4);
  out.sifted = sift(a, whole, whole, out.unbalanced->p_prime, eps_s, eps / 32, search);

  const GSet s = threshold_set(aa, 1 + eps / 8, false);
  out.smoothing = find_smoothing_subspace(out.sifted->drc.a1, out.sifted->drc.a2, s, eps / 32, cfg.codim_max);
  if (!out.smoothing) {
    throw OracleBudgetExceeded("density_increment_step: no smoothing subspace of codimension <= " +
                               std::to_string(cfg.codim_max));
  }
  const CosetDensity best = best_coset(a, out.smoothing->v.bohr.members());
  out.translate = best.translate;
  out.new_density = best.density;
  if (best.density < (1 + eps / k.c_inc) * out.alpha * (1 - kRel)) {
    throw ConstantBustingInstance("c_inc", "density_increment_step: coset density " + std::to_string(best.density) +
                                               " below (1 + eps/C_inc) alpha");
  }
  out.variant = IncrementVariant::Increment;
  return out;
}

// ---------------------------------------------------------------------------

NarrowOutcome bour_narrow(const GSet& a, const BohrSet& b, const BohrSet& bp, const BohrSet& bpp, double eps,
                          const Constants& k) {
  require_same(a.group(), b.group());
  require_same(a.group(), bp.group());
  require_same(a.group(), bpp.group());
  if (a.empty()) throw DomainError("bour_narrow needs nonempty A");
  if (!a.subset_of(b.members())) throw HypothesisViolation("bour_narrow: A is not inside B");
  const Regularity reg = b.regularity() ? *b.regularity() : regularity_of(b, k.reg_const);
  if (!reg.regular) throw HypothesisViolation("bour_narrow: B is not regular");
  const double alpha = static_cast<double>(a.card()) / static_cast<double>(b.size());
  const double rho = k.c_narrow * alpha * eps / static_cast<double>(std::max<std::size_t>(b.rank(), 1));
  const GSet small = dilate(b, rho).members();
  if (!bp.members().subset_of(small) || !bpp.members().subset_of(small)) {
    throw HypothesisViolation("bour_narrow: B' or B'' is not inside B_rho with rho = " + std::to_string(rho));
  }
  const auto d1 = translate_densities(a, bp.members());
  const auto d2 = translate_densities(a, bpp.members());
  const auto m1 = static_cast<std::size_t>(std::max_element(d1.begin(), d1.end()) - d1.begin());
  if (d1[m1] >= (1 + eps / 2) * alpha * (1 - kRel)) return {NarrowVariant::IncOnBprime, m1, d1[m1], d2[m1], alpha};
  const auto m2 = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
  if (d2[m2] >= (1 + eps / 2) * alpha * (1 - kRel)) {
    return {NarrowVariant::IncOnBdoubleprime, m2, d1[m2], d2[m2], alpha};
  }
  std::size_t x = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const double v = std::min(d1[i], d2[i]);
    if (v > best) {
      best = v;
      x = i;
    }
  }
  if (best >= (1 - eps) * alpha * (1 - kRel)) return {NarrowVariant::Translate, x, d1[x], d2[x], alpha};
  throw ConstantBustingInstance("c_narrow", "bour_narrow: no alternative holds (best translate " +
                                                std::to_string(best) + ", alpha " + std::to_string(alpha) + ")");
}

}  // namespace km
