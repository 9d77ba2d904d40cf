#include "km/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "km/error.hpp"
#include "km/io.hpp"

namespace km {

const char* to_string(Terminal t) { return t == Terminal::NearUniform ? "NearUniform" : "BudgetExceeded"; }

// ---------------------------------------------------------------------------
// Constructions

namespace {

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// (2k - 1)^d without overflow past `limit`.
bool base_fits(std::int64_t k, int d, std::int64_t n) {
  const std::int64_t base = 2 * k - 1;
  std::int64_t v = 1;
  for (int i = 0; i < d; ++i) {
    if (v > (2 * n) / base + 1) return false;
    v *= base;
  }
  return (v - 1) / 2 + 1 <= n;
}

}  // namespace

BehrendSet behrend(std::int64_t n, BehrendStrategy strategy) {
  if (n < 1) throw DomainError("behrend needs n >= 1");
  BehrendSet out;
  out.n = n;
  out.strategy = strategy;
  if (strategy == BehrendStrategy::Ternary) {
    // Binary digits of m read in base 3.
    for (std::uint64_t m = 0;; ++m) {
      std::int64_t x = 0, place = 1;
      for (std::uint64_t b = m; b != 0; b >>= 1, place *= 3) {
        if (b & 1U) x += place;
      }
      if (x >= n) break;
      out.elements.push_back(x + 1);
    }
    return out;
  }
  const int dmax = static_cast<int>(std::ceil(std::sqrt(std::log(static_cast<double>(n))))) + 2;
  for (int d = 2; d <= dmax; ++d) {
    std::int64_t k = 1;
    while (base_fits(k + 1, d, n)) ++k;
    const std::int64_t base = 2 * k - 1;
    const std::int64_t total = ipow(k, d);
    std::map<std::int64_t, std::vector<std::int64_t>> shells;
    std::vector<std::int64_t> digit(static_cast<std::size_t>(d), 0);
    for (std::int64_t t = 0; t < total; ++t) {
      std::int64_t r = 0, x = 0;
      for (int i = d; i-- > 0;) {
        r += digit[static_cast<std::size_t>(i)] * digit[static_cast<std::size_t>(i)];
        x = x * base + digit[static_cast<std::size_t>(i)];
      }
      shells[r].push_back(x + 1);
      for (int i = 0; i < d; ++i) {
        if (++digit[static_cast<std::size_t>(i)] < k) break;
        digit[static_cast<std::size_t>(i)] = 0;
      }
    }
    for (auto& [r, xs] : shells) {
      if (xs.size() > out.elements.size()) {
        out.elements = xs;
        out.dim = d;
        out.digits = k;
        out.radius = r;
      }
    }
  }
  std::sort(out.elements.begin(), out.elements.end());
  return out;
}

bool is_ap_free(std::span<const std::int64_t> a) { return count_3aps_integers(a) == a.size(); }

Embedded embed_interval(std::span<const std::int64_t> a, std::int64_t n) {
  if (n < 1) throw DomainError("embed_interval needs n >= 1");
  const Group g = Group::cyclic(static_cast<std::uint32_t>(3 * n + 1));
  GSet s(g);
  for (auto x : a) {
    if (x < 1 || x > n) throw DomainError("embed_interval: element " + std::to_string(x) + " outside [1, n]");
    s.insert(static_cast<std::size_t>(x));
  }
  return {g, s};
}

APRun longest_ap(const GSet& s) {
  const Group& g = s.group();
  if (!g.is_cyclic()) throw DomainError("longest_ap needs a cyclic group");
  if (s.empty()) throw DomainError("longest_ap needs a nonempty set");
  const std::size_t n = g.size();
  if (s.card() == n) return {0, n > 1 ? std::size_t{1} : std::size_t{0}, n};
  APRun best{s.indices().front(), n > 1 ? std::size_t{1} : std::size_t{0}, 1};
  for (std::size_t step = 1; step < n; ++step) {
    if (std::gcd(step, n) != 1) continue;
    // Start right after a gap; the orbit of a unit step is the whole group.
    std::size_t gap = 0;
    while (s.contains(gap)) gap = g.add(gap, step);
    std::size_t at = g.add(gap, step);
    std::size_t run = 0, start = 0;
    for (std::size_t j = 0; j < n; ++j, at = g.add(at, step)) {
      if (s.contains(at)) {
        if (run++ == 0) start = at;
        if (run > best.length || (run == best.length && step == best.step && start < best.start)) {
          best = {start, step, run};
        }
      } else {
        run = 0;
      }
    }
  }
  return best;
}

std::uint64_t least_prime_at_least(std::uint64_t n) {
  std::uint64_t p = std::max<std::uint64_t>(n, 2);
  while (!is_prime(p)) ++p;
  return p;
}

// ---------------------------------------------------------------------------
// Driver over F_q^n

namespace {

Group cell_group(std::uint32_t q, std::size_t dim) {
  return dim == 0 ? Group::cyclic(1) : Group(std::vector<std::uint32_t>(dim, q));
}

using Matrix = std::vector<std::vector<std::uint32_t>>;

// Basis of {v : H v = 0} for H in reduced row echelon form; empty optional
// shape errors are reported through `err`.
Matrix kernel_basis(const Matrix& h, std::size_t dim, std::uint32_t q, std::string* err) {
  std::vector<std::size_t> pivot;
  for (const auto& row : h) {
    if (row.size() != dim) {
      if (err) *err = "check row has wrong length";
      return {};
    }
    std::size_t c = 0;
    while (c < dim && row[c] == 0) ++c;
    if (c == dim || row[c] != 1 || (!pivot.empty() && c <= pivot.back())) {
      if (err) *err = "checks are not in reduced row echelon form";
      return {};
    }
    pivot.push_back(c);
  }
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t r = 0; r < h.size(); ++r) {
      if (r != i && h[r][pivot[i]] != 0) {
        if (err) *err = "checks are not in reduced row echelon form";
        return {};
      }
    }
  }
  Matrix basis;
  for (std::size_t f = 0; f < dim; ++f) {
    if (std::find(pivot.begin(), pivot.end(), f) != pivot.end()) continue;
    std::vector<std::uint32_t> v(dim, 0);
    v[f] = 1;
    for (std::size_t i = 0; i < h.size(); ++i) v[pivot[i]] = (q - h[i][f] % q) % q;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Ambient coordinates of origin + sum_j u_j basis_j.
std::vector<std::uint32_t> ambient(const std::vector<std::uint32_t>& origin, const Matrix& basis,
                                   const std::vector<std::uint32_t>& u, std::uint32_t q) {
  std::vector<std::uint64_t> acc(origin.begin(), origin.end());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += static_cast<std::uint64_t>(u[j]) * basis[j][c];
  }
  std::vector<std::uint32_t> out(acc.size());
  for (std::size_t c = 0; c < acc.size(); ++c) out[c] = static_cast<std::uint32_t>(acc[c] % q);
  return out;
}

// Composes the cell map with the coset t + span(kernel) of the cell.
void restrict_cell(std::vector<std::uint32_t>& origin, Matrix& basis, const std::vector<std::uint32_t>& t,
                   const Matrix& kernel, std::uint32_t q) {
  std::vector<std::uint32_t> zero(origin.size(), 0);
  Matrix next;
  for (const auto& v : kernel) next.push_back(ambient(zero, basis, v, q));
  origin = ambient(origin, basis, t, q);
  basis = std::move(next);
}

double inner_2a(const GSet& a) {
  const ProbMeasure mu = mu_of_set(a);
  return inner(conv(mu, mu), mu_of_set(dilate_set(a, 2)));
}

}  // namespace

GSet pull_back(const GSet& a, const std::vector<std::uint32_t>& origin, const Matrix& basis) {
  const Group& g = a.group();
  const std::uint32_t q = g.prime_field();
  if (q == 0) throw DomainError("pull_back needs Z_q^n with q prime");
  const Group h = cell_group(q, basis.size());
  GSet out(h);
  std::vector<std::uint32_t> u(basis.size(), 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!basis.empty()) u = h.element(i).coords;
    if (a.contains(g.index(Element{ambient(origin, basis, u, q)}))) out.insert(i);
  }
  return out;
}

FfqTrace roth_ffq_driver(const GSet& a, double eps, const FfqConfig& cfg, const Constants& k) {
  const Group& g = a.group();
  const std::uint32_t q = g.prime_field();
  if (q == 0 || q == 2) throw DomainError("roth_ffq_driver needs Z_q^n with q an odd prime");
  if (a.empty()) throw DomainError("roth_ffq_driver needs a nonempty set");
  if (!(eps > 0 && eps < 1)) throw DomainError("roth_ffq_driver needs eps in (0, 1)");
  FfqTrace t;
  t.group = g;
  t.eps = eps;
  t.config = cfg;
  t.origin.assign(g.rank(), 0);
  for (std::size_t j = 0; j < g.rank(); ++j) {
    t.basis.emplace_back(g.rank(), 0);
    t.basis.back()[j] = 1;
  }
  GSet cur = a;
  const IncrementConfig inc{cfg.codim_max, cfg.max_scan};
  while (true) {
    if (t.steps.size() >= cfg.max_steps) {
      t.reason = "step budget of " + std::to_string(cfg.max_steps) + " exhausted";
      break;
    }
    const Group& h = cur.group();
    const GSet c = dilate_set(cur, 2);
    IncrementOutcome out;
    try {
      out = density_increment_step(cur, c, eps, inc, k);
    } catch (const ConstantBustingInstance& e) {
      t.reason = std::string("constant ") + e.constant + ": " + e.what();
      t.margin = -1.0;
      break;
    } catch (const SiftExhausted& e) {
      t.reason = std::string("sift: ") + e.what();
      t.margin = std::min(e.best_f_margin, e.best_density_margin);
      break;
    } catch (const OracleBudgetExceeded& e) {
      t.reason = std::string("smoothing: ") + e.what();
      t.margin = -1.0;
      break;
    }
    if (out.variant == IncrementVariant::NearUniform) {
      t.terminal = Terminal::NearUniform;
      break;
    }
    const Subspace& v = out.smoothing->v;
    FfqStep s;
    s.dim = t.basis.size();
    s.checks = v.checks;
    s.translate = s.dim == 0 ? std::vector<std::uint32_t>{} : h.element(out.translate).coords;
    s.v_size = v.bohr.size();
    s.count = cur.intersect_count(v.bohr.members().translate(out.translate));
    s.alpha = cur.density();
    s.density = static_cast<double>(s.count) / static_cast<double>(s.v_size);
    s.p = out.lift.p;
    s.p_prime = out.unbalanced->p_prime;
    s.p_used = out.sifted->p_used;
    s.certificate = digest(ffq_step_to_json(s, false));
    const Matrix kernel = kernel_basis(s.checks, s.dim, q, nullptr);
    restrict_cell(t.origin, t.basis, s.translate, kernel, q);
    t.steps.push_back(std::move(s));
    cur = pull_back(a, t.origin, t.basis);
  }
  t.final_count = cur.card();
  t.final_density = cur.density();
  t.final_3aps = count_3aps(cur);
  t.inner_value = inner_2a(cur);
  return t;
}

Replay replay_ffq(const GSet& a, const FfqTrace& t, const Constants& k) {
  auto fail = [](std::string m) { return Replay{false, std::move(m)}; };
  const Group& g = a.group();
  if (!(g == t.group)) return fail("trace group differs from the input group");
  const std::uint32_t q = g.prime_field();
  if (q == 0) return fail("trace group is not Z_q^n");
  std::vector<std::uint32_t> origin(g.rank(), 0);
  Matrix basis;
  for (std::size_t j = 0; j < g.rank(); ++j) {
    basis.emplace_back(g.rank(), 0);
    basis.back()[j] = 1;
  }
  GSet cur = a;
  const double alpha0 = a.density();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const FfqStep& s = t.steps[i];
    const std::string at = "step " + std::to_string(i) + ": ";
    if (s.certificate != digest(ffq_step_to_json(s, false))) return fail(at + "certificate digest mismatch");
    if (s.dim != basis.size()) return fail(at + "dimension mismatch");
    std::string err;
    const Matrix kernel = kernel_basis(s.checks, s.dim, q, &err);
    if (!err.empty()) return fail(at + err);
    const Group& h = cur.group();
    const Subspace v = subspace_from_checks(h, s.checks);
    if (v.bohr.size() != s.v_size) return fail(at + "|V| mismatch");
    if (s.translate.size() != s.dim) return fail(at + "translate has wrong length");
    const std::size_t tidx = s.dim == 0 ? 0 : h.index(Element{s.translate});
    const std::size_t count = cur.intersect_count(v.bohr.members().translate(tidx));
    if (count != s.count) return fail(at + "coset count mismatch");
    // count / |V| >= (1 + eps / C_inc) |A_i| / |G_i|, in exact integers where possible.
    const long double lhs = static_cast<long double>(count) * static_cast<long double>(h.size());
    const long double rhs = (1.0L + t.eps / k.c_inc) * static_cast<long double>(cur.card()) *
                            static_cast<long double>(s.v_size);
    if (lhs < rhs * (1 - 1e-15L)) return fail(at + "density increment below (1 + eps/C_inc) alpha");
    restrict_cell(origin, basis, s.translate, kernel, q);
    cur = pull_back(a, origin, basis);
  }
  if (origin != t.origin || basis != t.basis) return fail("final cell mismatch");
  if (cur.card() != t.final_count) return fail("final count mismatch");
  if (count_3aps(cur) != t.final_3aps) return fail("final 3-AP count mismatch");
  const double inner_value = inner_2a(cur);
  if (std::abs(inner_value - t.inner_value) > 1e-10) return fail("final inner product mismatch");
  if (t.terminal == Terminal::NearUniform && std::abs(inner_value - 1.0) > t.eps * (1 + 1e-12)) {
    return fail("terminal is not near uniform");
  }
  const double bound = std::ceil(k.c_inc / t.eps * std::log(1.0 / alpha0)) + 1;
  if (static_cast<double>(t.steps.size()) > bound) return fail("trace longer than the step bound");
  return {};
}

// ---------------------------------------------------------------------------
// Driver over Z/NZ

namespace {

BohrSet whole_group_bohr(const Group& g) {
  BohrSet b = bohr_build(g, {0}, {2.0});
  is_regular(b);
  return b;
}

double rel_density(const GSet& a, const BohrSet& b) {
  return static_cast<double>(a.card()) / static_cast<double>(b.size());
}

GSet shifted(const GSet& a, std::size_t x) { return a.translate(a.group().neg(x)); }

// Outcome of one pass of the loop body.
struct ZnzPass {
  bool terminal = false;
  bool budget = false;
  std::string reason;
  double margin = 0.0;
  std::optional<ZnzStep> step;
};

}  // namespace

ZnzTrace znz_driver(const GSet& a, double eps, const ZnzConfig& cfg, const Constants& k) {
  const Group& g = a.group();
  if (!g.is_cyclic()) throw DomainError("znz_driver needs a cyclic group");
  if (a.empty()) throw DomainError("znz_driver needs a nonempty set");
  if (!(eps > 0 && eps < 1)) throw DomainError("znz_driver needs eps in (0, 1)");
  const int kk = cfg.mode == ZnzMode::ThreeAP ? 2 : 1;
  if (kk == 2 && g.size() % 2 == 0) throw DomainError("the 3-AP driver needs an odd modulus");
  const double eps_n = 2 * eps / k.c_inc;

  ZnzTrace t;
  t.group = g;
  t.mode = cfg.mode;
  t.eps = eps;
  t.config = cfg;
  t.count_3aps = count_3aps(a);
  BohrSet b = whole_group_bohr(g);
  GSet at = a;
  std::size_t total = 0;

  auto budget = [&](std::string reason, double margin) {
    t.terminal = Terminal::BudgetExceeded;
    t.reason = std::move(reason);
    t.margin = margin;
  };

  while (true) {
    if (t.steps.size() >= cfg.max_steps) {
      budget("step budget of " + std::to_string(cfg.max_steps) + " exhausted", 0.0);
      break;
    }
    const double alpha = rel_density(at, b);
    try {
      const double d = static_cast<double>(std::max<std::size_t>(b.rank(), 1));
      BohrSet bp = regular_dilate(dilate(b, k.c_narrow * alpha * eps_n / d), k.reg_const).set;
      const double dp = static_cast<double>(std::max<std::size_t>(bp.rank(), 1));
      BohrSet bpp =
          regular_dilate(dilate(bp, k.c_bohr * eps * (1 - eps_n) * alpha / (16.0 * kk * dp)), k.reg_const).set;
      const NarrowOutcome nar = bour_narrow(at, b, bp, bpp, eps_n, k);

      if (nar.variant != NarrowVariant::Translate) {
        const bool first = nar.variant == NarrowVariant::IncOnBprime;
        const BohrSet& cell = first ? bp : bpp;
        ZnzStep s;
        s.kind = first ? "narrow-bprime" : "narrow-bdoubleprime";
        s.cell = cell;
        s.shift = nar.x;
        const GSet next = shifted(at, nar.x) & cell.members();
        s.count = next.card();
        s.alpha = alpha;
        s.density = rel_density(next, cell);
        s.certificate = digest(znz_step_to_json(s, false));
        t.steps.push_back(s);
        b = cell;
        at = next;
        total = g.add(total, nar.x);
        continue;
      }

      const GSet base = shifted(at, nar.x);
      const GSet a1 = base & bp.members();
      const GSet a2 = base & bpp.members();
      const double alpha1 = rel_density(a1, bp);
      const double mu_bp = static_cast<double>(bp.size()) / static_cast<double>(g.size());
      GSet c(g);
      double value, target;
      if (cfg.mode == ZnzMode::ThreeAP) {
        c = dilate_set(a2, 2);
        value = inner(conv(mu_of_set(a1), mu_of_set(a1)), mu_of_set(c));
        target = 0.5 / mu_bp;
      } else {
        const GSet ss = sumset(a1, a1);
        value = static_cast<double>(ss.intersect_count(bpp.members())) / static_cast<double>(bpp.size());
        target = 1 - alpha1 / 4;
        c = bpp.members() & ss.complement();
      }
      if (value >= target * (1 - 1e-12)) {
        t.terminal = Terminal::NearUniform;
        t.bp = bp;
        t.bpp = bpp;
        t.x = nar.x;
        t.inner_value = value;
        t.target = target;
        break;
      }

      const BohrSet kbpp = kk == 2 ? freq_dilate(bpp, 2) : bpp;
      const BohrContext ctx{&bp, &kbpp};
      const LiftOutcome lift = holder_lift(a1, c, eps, k, &ctx);
      if (lift.variant == LiftVariant::NearUniform) {
        budget("Hoelder lifting is near uniform but the terminal test fails", value - target);
        break;
      }
      const double dpp = static_cast<double>(std::max<std::size_t>(bpp.rank(), 1));
      const BohrSet b3 = regular_dilate(dilate(bpp, k.c_posdef / dpp), k.reg_const).set;
      const BohrSet kb3 = kk == 2 ? freq_dilate(b3, 2) : b3;
      const ProbMeasure m2 = mu_of_set(kbpp.members());
      const ProbMeasure m3 = mu_of_set(kb3.members());
      const FuncR nu = conv(diffconv(m2, m2), diffconv(m3, m3));

      BohrUnbalanceOutcome bu;
      try {
        bu = bohr_unbalance(a1, bp, nu, eps / 4, lift.p, k);
      } catch (const DomainError& e) {
        budget(std::string("positive-definite comparison (c_posdef): ") + e.what(), -1.0);
        break;
      }

      // Averaging over x in k B'' + k B''' for the sifting pair.
      const ProbMeasure mu1 = mu_of_set(a1);
      const FuncR aa = diffconv(mu1, mu1);
      const FuncR mm = conv(m2, m3);
      double top = 0.0;
      for (std::size_t y = 0; y < g.size(); ++y) top = std::max(top, aa[y]);
      std::vector<double> powa(g.size());
      for (std::size_t y = 0; y < g.size(); ++y) powa[y] = std::pow(aa[y] / top, bu.p_prime);
      std::size_t x2 = 0;
      double best = -1.0;
      for (auto x : sumset(kbpp.members(), kb3.members()).indices()) {
        double acc = 0.0;
        for (std::size_t y = 0; y < g.size(); ++y) acc += mm[g.add(y, x)] * powa[y];
        if (acc > best) {
          best = acc;
          x2 = x;
        }
      }
      const GSet b2set = shifted(kb3.members(), x2);

      ShiftSearch search;
      search.mode = ShiftSearch::Exhaustive;
      search.max_scan = cfg.max_scan;
      const SiftResult sf = sift(a1, kbpp.members(), b2set, bu.p_prime, (eps / 32) / (1 + eps / 16), eps / 256, search);

      const FuncR h = diffconv(mu_of_set(sf.drc.a1), mu_of_set(sf.drc.a2));
      GSet s(g);
      const double thr = (1 + eps / 32) / mu_bp;
      for (std::size_t y = 0; y < g.size(); ++y) {
        if (aa[y] >= thr * (1 - 1e-12) && h[y] > 0) s.insert(y);
      }
      const SmoothingBohr sm =
          find_smoothing_bohr(kbpp, kb3, sf.drc.a1, sf.drc.a2, s, eps / 256, cfg.smoothing, k.reg_const);
      if (!sm.found) {
        budget("smoothing oracle found no Bohr set within budget after " + std::to_string(sm.candidates) +
                   " candidates",
               sm.best_margin);
        break;
      }
      BohrSet cell = *sm.found;
      const Regularity reg = is_regular(cell, k.reg_const);
      if (!reg.regular) {
        budget("smoothing candidate is not regular", reg.margin);
        break;
      }
      const CosetDensity cd = best_coset(at, cell.members());
      const double need = (1 + eps / k.c_inc) * alpha;
      if (cd.density < need * (1 - 1e-12)) {
        budget("constant c_inc: smoothed density below (1 + eps/C_inc) alpha", cd.density - need);
        break;
      }
      ZnzStep st;
      st.kind = "smoothing";
      st.cell = cell;
      st.shift = cd.translate;
      const GSet next = shifted(at, cd.translate) & cell.members();
      st.count = next.card();
      st.alpha = alpha;
      st.density = rel_density(next, cell);
      st.p = lift.p;
      st.p_prime = bu.p_prime;
      st.p_used = sf.p_used;
      st.certificate = digest(znz_step_to_json(st, false));
      t.steps.push_back(st);
      b = cell;
      at = next;
      total = g.add(total, cd.translate);
    } catch (const ConstantBustingInstance& e) {
      budget(std::string("constant ") + e.constant + ": " + e.what(), -1.0);
      break;
    } catch (const SiftExhausted& e) {
      budget(std::string("sift: ") + e.what(), std::min(e.best_f_margin, e.best_density_margin));
      break;
    } catch (const OracleBudgetExceeded& e) {
      budget(std::string("oracle: ") + e.what(), -1.0);
      break;
    } catch (const HypothesisViolation& e) {
      budget(std::string("hypothesis: ") + e.what(), -1.0);
      break;
    }
  }
  t.cell = b;
  t.total_shift = total;
  t.cell_count = at.card();
  t.alpha = rel_density(at, b);
  return t;
}

ZnzTrace roth_znz_driver(std::span<const std::int64_t> a, std::int64_t n, double eps, const ZnzConfig& cfg,
                         const Constants& k) {
  if (n < 1) throw DomainError("roth_znz_driver needs n >= 1");
  std::int64_t m = 3 * n + 1;
  if (cfg.mode == ZnzMode::ThreeAP && m % 2 == 0) ++m;
  const Group g = Group::cyclic(static_cast<std::uint32_t>(m));
  GSet s(g);
  for (auto x : a) {
    if (x < 1 || x > n) throw DomainError("roth_znz_driver: element " + std::to_string(x) + " outside [1, n]");
    s.insert(static_cast<std::size_t>(x));
  }
  return znz_driver(s, eps, cfg, k);
}

GSet znz_cell_set(const GSet& a, const ZnzTrace& t) {
  GSet at = a;
  for (const auto& s : t.steps) at = shifted(at, s.shift) & s.cell.members();
  return at;
}

Replay replay_znz(const GSet& a, const ZnzTrace& t, const Constants& k) {
  auto fail = [](std::string m) { return Replay{false, std::move(m)}; };
  const Group& g = a.group();
  if (!(g == t.group)) return fail("trace group differs from the input group");
  if (count_3aps(a) != t.count_3aps) return fail("3-AP count mismatch");
  BohrSet b = whole_group_bohr(g);
  GSet at = a;
  std::size_t total = 0;
  double prev = rel_density(at, b);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const ZnzStep& s = t.steps[i];
    const std::string where = "step " + std::to_string(i) + ": ";
    if (s.certificate != digest(znz_step_to_json(s, false))) return fail(where + "certificate digest mismatch");
    BohrSet cell = bohr_build(g, s.cell.freqs(), s.cell.widths());
    if (!(cell.members() == s.cell.members())) return fail(where + "cell membership mismatch");
    if (!is_regular(cell, k.reg_const).regular) return fail(where + "cell is not regular");
    if (std::abs(rel_density(at, b) - s.alpha) > 1e-12) return fail(where + "alpha mismatch");
    const GSet next = shifted(at, s.shift) & cell.members();
    if (next.card() != s.count) return fail(where + "count mismatch");
    const double dens = rel_density(next, cell);
    if (dens < (1 + t.eps / k.c_inc) * prev * (1 - 1e-12)) return fail(where + "density increment too small");
    prev = dens;
    b = cell;
    at = next;
    total = g.add(total, s.shift);
  }
  if (total != t.total_shift) return fail("total shift mismatch");
  if (at.card() != t.cell_count) return fail("cell count mismatch");
  if (!(b.members() == t.cell.members())) return fail("final cell mismatch");
  if (t.terminal == Terminal::NearUniform) {
    if (!t.bp.members().subset_of(b.members()) || !t.bpp.members().subset_of(t.bp.members())) {
      return fail("terminal Bohr sets are not nested");
    }
    const GSet base = shifted(at, t.x);
    const GSet a1 = base & t.bp.members();
    const GSet a2 = base & t.bpp.members();
    if (a1.empty() || a2.empty()) return fail("terminal sets are empty");
    double value, target;
    if (t.mode == ZnzMode::ThreeAP) {
      value = inner(conv(mu_of_set(a1), mu_of_set(a1)), mu_of_set(dilate_set(a2, 2)));
      target = 0.5 * static_cast<double>(g.size()) / static_cast<double>(t.bp.size());
    } else {
      value = static_cast<double>(sumset(a1, a1).intersect_count(t.bpp.members())) /
              static_cast<double>(t.bpp.size());
      target = 1 - rel_density(a1, t.bp) / 4;
    }
    if (std::abs(value - t.inner_value) > 1e-10 || std::abs(target - t.target) > 1e-10) {
      return fail("terminal certificate mismatch");
    }
    if (value < target * (1 - 1e-12)) return fail("terminal certificate does not hold");
  }
  return {};
}

// ---------------------------------------------------------------------------
// A + A + A

APReport three_sumset_ap_pipeline(const GSet& a, double eps, const ZnzConfig& cfg, const Constants& k) {
  const Group& g = a.group();
  if (!g.is_cyclic() || !is_prime(g.size())) throw DomainError("three_sumset_ap_pipeline needs Z/NZ, N prime");
  ZnzConfig c2 = cfg;
  c2.mode = ZnzMode::Sumset;
  APReport r;
  r.trace = znz_driver(a, eps, c2, k);
  const GSet s3 = sumset(sumset(a, a), a);
  r.direct = longest_ap(s3);
  const ZnzTrace& t = r.trace;
  if (t.terminal != Terminal::NearUniform) {
    r.stage = "driver terminal: " + t.reason;
    r.margin = t.margin;
    return r;
  }
  const GSet base = shifted(znz_cell_set(a, t), t.x);
  const GSet a1 = base & t.bp.members();
  const GSet ss = sumset(a1, a1);
  const double alpha1 = rel_density(a1, t.bp);
  const double cover2 = static_cast<double>(ss.intersect_count(t.bpp.members())) / static_cast<double>(t.bpp.size());
  if (cover2 < (1 - alpha1 / 4) * (1 - 1e-12)) {
    r.stage = "mu_B'(A'+A') >= 1 - alpha/4";
    r.margin = cover2 - (1 - alpha1 / 4);
    return r;
  }
  r.rho = k.c_sumset * alpha1 / static_cast<double>(std::max<std::size_t>(t.bpp.rank(), 1));
  r.b2 = dilate(t.bpp, r.rho);
  const GSet s3p = sumset(ss, a1);
  r.covered = s3p.intersect_count(r.b2.members());
  if (r.covered < r.b2.size()) {
    r.stage = "B'' inside A'+A'+A'";
    r.margin = static_cast<double>(r.covered) / static_cast<double>(r.b2.size()) - 1.0;
    return r;
  }
  const ExtractedAP ex = extract_ap(r.b2);
  // A' + A' + A' lies in A + A + A - 3X with X the accumulated translate.
  const std::size_t shift = g.scale(3, g.add(t.total_shift, t.x));
  r.run = ex.run;
  r.run.start = g.add(ex.run.start, shift);
  r.lemma_bound = ex.lemma_bound;
  r.argument_ok = true;
  bool inside = true;
  for (std::size_t j = 0; j < r.run.length; ++j) inside = inside && s3.contains(r.run.term(g, j));
  r.verified = inside;
  if (!inside) {
    r.argument_ok = false;
    r.stage = "run inside A+A+A";
    r.margin = -1.0;
  }
  return r;
}

APReport three_sumset_ap_pipeline(std::span<const std::int64_t> a, std::int64_t n, double eps,
                                  const ZnzConfig& cfg, const Constants& k) {
  if (n < 1) throw DomainError("three_sumset_ap_pipeline needs n >= 1");
  const auto p = least_prime_at_least(static_cast<std::uint64_t>(n));
  const Group g = Group::cyclic(static_cast<std::uint32_t>(p));
  GSet s(g);
  for (auto x : a) {
    if (x < 1 || x > n) throw DomainError("three_sumset_ap_pipeline: element outside [1, n]");
    s.insert(static_cast<std::size_t>(x) % p);
  }
  return three_sumset_ap_pipeline(s, eps, cfg, k);
}

}  // namespace km
