// Lemma suites. Every check recomputes its quantity from raw set data by
// direct counting where practical, independent of the routine under test.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "km/bohr.hpp"
#include "km/error.hpp"
#include "km/fourier.hpp"
#include "km/func.hpp"
#include "km/io.hpp"
#include "km/steps.hpp"
#include "suite_registry.hpp"

namespace km::suites {

namespace {

constexpr int kRetries = 64;

template <class Payload>
void check(InstanceResult& r, double slack, const std::string& what, Payload&& payload) {
  r.margin = std::min(r.margin, slack);
  if (slack < 0 && !r.failed) {
    r.failed = true;
    r.message = what;
    r.payload = payload();
  }
}

void fail(InstanceResult& r, const std::string& what, json payload) {
  r.margin = std::min(r.margin, -1.0);
  if (!r.failed) {
    r.failed = true;
    r.message = what;
    r.payload = std::move(payload);
  }
}

void observe_max(InstanceResult& r, const std::string& key, double v) {
  auto [it, fresh] = r.observed.emplace(key, v);
  if (!fresh) it->second = std::max(it->second, v);
}

void observe_min(InstanceResult& r, const std::string& key, double v) {
  auto [it, fresh] = r.observed.emplace(key, v);
  if (!fresh) it->second = std::min(it->second, v);
}

double rel_scale(double v) { return std::max(1.0, std::abs(v)); }

// ---------------------------------------------------------------------------
// Generators

Group random_group(Rng& rng, std::size_t max_size) {
  const auto kind = rng.below(3);
  if (kind == 0) return Group::cyclic(static_cast<std::uint32_t>(rng.between(2, static_cast<std::int64_t>(max_size))));
  if (kind == 1) {
    const auto a = static_cast<std::uint32_t>(rng.between(2, std::min<std::int64_t>(16, max_size / 2)));
    const auto b = static_cast<std::uint32_t>(rng.between(2, std::max<std::int64_t>(2, max_size / a)));
    return Group(std::vector<std::uint32_t>{a, b});
  }
  static constexpr std::uint32_t kPrimes[] = {2, 3, 5};
  const std::uint32_t q = kPrimes[rng.below(3)];
  std::size_t n = 1, size = q;
  while (size * q <= max_size) size *= q, ++n;
  return Group(std::vector<std::uint32_t>(static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(n))), q));
}

GSet random_subset(Rng& rng, const GSet& base, double density) {
  GSet s(base.group());
  const auto idx = base.indices();
  for (auto i : idx) {
    if (rng.coin(density)) s.insert(i);
  }
  if (s.empty()) s.insert(idx[rng.below(idx.size())]);
  return s;
}

GSet random_set(Rng& rng, const Group& g, double density) { return random_subset(rng, GSet::full(g), density); }

FuncR random_real(Rng& rng, const Group& g, double lo, double hi) {
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.uniform(lo, hi);
  return FuncR(g, std::move(v));
}

FuncR random_exact(Rng& rng, const Group& g) {
  std::vector<std::int64_t> num(g.size());
  for (auto& x : num) x = rng.between(-6, 6);
  return FuncR::exact(g, std::move(num), rng.between(1, 9));
}

// All nonempty subsets of Z5, then of Z7.
constexpr std::size_t kSmallSubsets = 31 + 127;

GSet small_subset(std::size_t index) {
  const std::uint32_t n = index < 31 ? 5 : 7;
  const std::uint64_t mask = index < 31 ? index + 1 : index - 31 + 1;
  const Group g = Group::cyclic(n);
  GSet s(g);
  for (std::uint32_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1U) s.insert(i);
  }
  return s;
}

GSet mask_set(const Group& g, std::uint64_t mask) {
  GSet s(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if ((mask >> i) & 1U) s.insert(i);
  }
  return s;
}

std::uint32_t random_prime(Rng& rng, std::uint32_t lo, std::uint32_t hi) {
  for (;;) {
    const auto n = static_cast<std::uint32_t>(rng.between(lo, hi));
    if (is_prime(n)) return n;
  }
}

BohrSet random_bohr(Rng& rng, std::uint32_t n, std::size_t max_rank, double wlo, double whi) {
  const Group g = Group::cyclic(n);
  const std::size_t d = std::min<std::size_t>(static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(max_rank))), n - 1);
  std::vector<std::size_t> freqs;
  while (freqs.size() < d) {
    const auto f = static_cast<std::size_t>(rng.between(1, n - 1));
    if (std::find(freqs.begin(), freqs.end(), f) == freqs.end()) freqs.push_back(f);
  }
  std::vector<double> widths(d);
  for (auto& w : widths) w = rng.uniform(wlo, whi);
  return bohr_build(g, std::move(freqs), std::move(widths));
}

// Independent membership in a cyclic Bohr set.
bool in_bohr(std::uint64_t n, const std::vector<std::size_t>& freqs, const std::vector<double>& widths,
             std::uint64_t x, double rho = 1.0) {
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const std::uint64_t m = (static_cast<unsigned __int128>(freqs[j]) * x) % n;
    const double t = static_cast<double>(std::min(m, n - m)) / static_cast<double>(n);
    const double dist = 2.0 * std::sin(std::numbers::pi * t);
    if (dist > std::min(2.0, rho * widths[j]) * (1 + kBohrTol)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Counting oracles

// (mu_X * mu_Y)(x) = |G| #{(a, b) in X x Y : a + b = x} / (|X| |Y|)
std::vector<double> conv_counts(const GSet& x, const GSet& y) {
  const Group& g = x.group();
  std::vector<double> c(g.size(), 0.0);
  const auto xs = x.indices(), ys = y.indices();
  for (auto a : xs) {
    for (auto b : ys) c[g.add(a, b)] += 1.0;
  }
  const double s = static_cast<double>(g.size()) / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
  for (auto& v : c) v *= s;
  return c;
}

// (mu_X o mu_Y)(x) = |G| #{(a, b) in X x Y : b - a = x} / (|X| |Y|)
std::vector<double> diffconv_counts(const GSet& x, const GSet& y) {
  const Group& g = x.group();
  std::vector<double> c(g.size(), 0.0);
  const auto xs = x.indices(), ys = y.indices();
  for (auto a : xs) {
    for (auto b : ys) c[g.sub(b, a)] += 1.0;
  }
  const double s = static_cast<double>(g.size()) / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
  for (auto& v : c) v *= s;
  return c;
}

// (E_x w(x) |f(x)|^p)^{1/p}
double lp_weighted(const std::vector<double>& f, const std::vector<double>& w, int p) {
  long double acc = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (w[i] != 0.0) acc += static_cast<long double>(w[i]) * std::pow(static_cast<long double>(std::abs(f[i])), p);
  }
  return static_cast<double>(std::pow(acc / static_cast<long double>(f.size()), 1.0L / p));
}

// <mu_A * mu_A, mu_C> = |G| #{(a, a') : a + a' in C} / (|A|^2 |C|)
double holder_inner(const GSet& a, const GSet& c) {
  const Group& g = a.group();
  const auto xs = a.indices();
  double hits = 0;
  for (auto x : xs) {
    for (auto y : xs) hits += c.contains(g.add(x, y)) ? 1.0 : 0.0;
  }
  return static_cast<double>(g.size()) * hits /
         (static_cast<double>(xs.size()) * static_cast<double>(xs.size()) * static_cast<double>(c.card()));
}

json func_json(const FuncR& f) { return {{"group", f.group().to_string()}, {"values", f.values()}}; }

// ---------------------------------------------------------------------------
// Algebra

Prelude adjoint_prelude(const Constants&) {
  const Group g = Group::cyclic(7);
  std::size_t printed_miss = 0, corrected_miss = 0, oracle_miss = 0;
  for (std::size_t a = 0; a < 7; ++a) {
    for (std::size_t b = 0; b < 7; ++b) {
      for (std::size_t c = 0; c < 7; ++c) {
        const std::size_t ia[] = {a}, ib[] = {b}, ic[] = {c};
        const FuncR f = FuncR::indicator(GSet::from_indices(g, ia));
        const FuncR gg = FuncR::indicator(GSet::from_indices(g, ib));
        const FuncR h = FuncR::indicator(GSet::from_indices(g, ic));
        const double lhs = inner(f, conv(gg, h));
        const double oracle = (a == (b + c) % 7) ? 1.0 / 49 : 0.0;
        if (std::abs(lhs - oracle) > 1e-15) ++oracle_miss;
        if (std::abs(lhs - inner(diffconv(f, h), gg)) > 1e-15) ++printed_miss;
        if (std::abs(lhs - inner(diffconv(h, f), gg)) > 1e-15) ++corrected_miss;
      }
    }
  }
  Prelude p;
  p.ok = oracle_miss == 0 && corrected_miss == 0;
  p.message = "delta oracle on Z7: " + std::to_string(oracle_miss) + " oracle and " + std::to_string(corrected_miss) +
              " variant mismatches";
  p.notes["variant"] = corrected_miss == 0 ? "<f, g*h> = <h o f, g>" : "none";
  p.notes["rejected_form"] = "<f, g*h> = <f o h, g>";
  p.notes["rejected_form_mismatches"] = std::to_string(printed_miss) + "/343";
  return p;
}

InstanceResult adjoint_run(std::size_t, Rng& rng, const Context&) {
  InstanceResult r;
  const Group g = random_group(rng, 64);
  const FuncR f = random_real(rng, g, -1, 1), gg = random_real(rng, g, -1, 1), h = random_real(rng, g, -1, 1);
  const double lhs = inner(f, conv(gg, h));
  const double rhs = inner(diffconv(h, f), gg);
  const double err = std::abs(lhs - rhs);
  observe_max(r, "max_abs_error", err);
  check(r, 1e-10 * rel_scale(lhs) - err, "<f, g*h> != <h o f, g>", [&] {
    return json{{"f", func_json(f)}, {"g", func_json(gg)}, {"h", func_json(h)}, {"lhs", lhs}, {"rhs", rhs}};
  });
  return r;
}

InstanceResult conv_fourier_run(std::size_t, Rng& rng, const Context&) {
  InstanceResult r;
  const Group g = random_group(rng, 512);
  const std::size_t n = g.size();

  // Exact path against the float path, cell by cell.
  const FuncR fe = random_exact(rng, g), ge = random_exact(rng, g);
  const auto payload_exact = [&] { return json{{"f", func_json(fe)}, {"g", func_json(ge)}}; };
  for (int which = 0; which < 2; ++which) {
    const FuncR h = which == 0 ? conv(fe, ge) : diffconv(fe, ge);
    const FuncR hf = which == 0 ? conv(fe, ge, ConvPath::Float) : diffconv(fe, ge, ConvPath::Float);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(h[i] - hf[i]) / rel_scale(h[i]));
    observe_max(r, "max_exact_float_error", worst);
    check(r, 1e-12 - worst, which == 0 ? "conv exact/float disagree" : "diffconv exact/float disagree", payload_exact);
    if (which == 0 && h.is_exact() && fe.is_exact() && ge.is_exact()) {
      // mean(h) = mean(f) mean(g) as rationals.
      __int128 sh = 0, sf = 0, sg = 0;
      for (auto v : h.exact_rep().num) sh += v;
      for (auto v : fe.exact_rep().num) sf += v;
      for (auto v : ge.exact_rep().num) sg += v;
      const __int128 lhs = sh * static_cast<__int128>(n) * fe.exact_rep().scale * ge.exact_rep().scale;
      const __int128 rhs = sf * sg * h.exact_rep().scale;
      check(r, lhs == rhs ? 0.0 : -1.0, "exact mean multiplicativity fails", payload_exact);
    }
  }

  const FuncR f = random_real(rng, g, -1, 1), gg = random_real(rng, g, -1, 1);
  const auto payload = [&] { return json{{"f", func_json(f)}, {"g", func_json(gg)}}; };
  const FuncC F = dft(f), G = dft(gg);
  {
    const FuncC H = dft(conv(f, gg));
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(H[i] - F[i] * G[i]));
    observe_max(r, "max_convolution_theorem_error", e);
    check(r, 1e-9 - e, "convolution theorem", payload);
  }
  {
    const FuncC H = dft(diffconv(f, f));
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(H[i] - std::norm(F[i])));
    observe_max(r, "max_diffconv_theorem_error", e);
    check(r, 1e-9 - e, "difference convolution theorem", payload);
  }
  {
    long double l2 = 0, spec = 0;
    for (std::size_t i = 0; i < n; ++i) l2 += static_cast<long double>(f[i]) * f[i], spec += std::norm(F[i]);
    l2 /= static_cast<long double>(n);
    const double e = static_cast<double>(std::abs(l2 - spec));
    observe_max(r, "max_parseval_error", e);
    check(r, 1e-9 * rel_scale(static_cast<double>(l2)) - e, "Parseval", payload);
    const double at0 = diffconv(f, f)[0];
    const double e0 = std::abs(at0 - static_cast<double>(l2));
    check(r, 1e-12 * rel_scale(at0) - e0, "(f o f)(0) != ||f||_2^2", payload);
  }
  {
    const double e = std::abs(conv(f, gg).mean() - f.mean() * gg.mean());
    observe_max(r, "max_mean_error", e);
    check(r, 1e-10 - e, "mean multiplicativity (float)", payload);
  }
  {
    const FuncR back = idft_real(F);
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(back[i] - f[i]));
    check(r, 1e-10 - e, "inverse transform round trip", payload);
  }
  return r;
}

InstanceResult moment_spectrum_run(std::size_t, Rng& rng, const Context&) {
  InstanceResult r;
  const Group g = random_group(rng, 24);
  FuncR f;
  bool positive = false;
  if (rng.coin(0.5)) {
    f = random_real(rng, g, -1, 1);
  } else {
    const ProbMeasure m = mu_of_set(random_set(rng, g, rng.uniform(0.1, 0.9)));
    f = diffconv(m, m).plus_constant_exact(-1, 1);
    positive = true;
  }
  const int kmax = g.size() <= 6 ? 8 : 4;
  for (int k = 1; k <= kmax; ++k) {
    long double direct = 0;
    for (auto v : f.values()) direct += std::pow(static_cast<long double>(v), k);
    direct /= static_cast<long double>(g.size());
    const double spec = moment_via_spectrum(f, k);
    const double e = std::abs(spec - static_cast<double>(direct));
    observe_max(r, "max_error", e);
    const auto payload = [&] { return json{{"f", func_json(f)}, {"k", k}, {"direct", static_cast<double>(direct)}, {"spectral", spec}}; };
    check(r, 1e-8 * rel_scale(static_cast<double>(direct)) - e, "dual-side moment differs from E f^k", payload);
    if (positive && k % 2 == 1) check(r, spec + 1e-10, "odd moment of mu o mu - 1 is negative", payload);
  }
  return r;
}

GSet algebra_set(std::size_t index, Rng& rng, const Context& ctx, std::size_t max_size) {
  if (ctx.exhaustive) return small_subset(index);
  return random_set(rng, random_group(rng, max_size), rng.uniform(0.05, 0.95));
}

FuncR balanced_aa(const GSet& a) {
  const ProbMeasure m = mu_of_set(a);
  return diffconv(m, m).plus_constant_exact(-1, 1);
}

InstanceResult spectral_nonneg_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const GSet a = algebra_set(index, rng, ctx, 512);
  const SpectralMin sm = spectral_min(balanced_aa(a));
  observe_min(r, "min_spectrum", sm.min_re);
  observe_max(r, "max_abs_imaginary", sm.max_abs_im);
  check(r, sm.min_re + 1e-10, "negative Fourier coefficient of mu_A o mu_A - 1",
        [&] { return json{{"set", set_to_json(a)}, {"min_re", sm.min_re}}; });
  return r;
}

InstanceResult lp_monotone_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const GSet a = algebra_set(index, rng, ctx, 512);
  const ProbMeasure m = mu_of_set(a);
  const FuncR plus = conv(m, m).plus_constant_exact(-1, 1);
  const FuncR minus = diffconv(m, m).plus_constant_exact(-1, 1);
  for (int p : {2, 4, 6}) {
    const double lhs = lp_norm(plus, p), rhs = lp_norm(minus, p);
    observe_max(r, "max_ratio", rhs > 0 ? lhs / rhs : 0.0);
    check(r, rhs + 1e-10 - lhs, "||mu*mu - 1||_p > ||mu o mu - 1||_p",
          [&] { return json{{"set", set_to_json(a)}, {"p", p}, {"conv_norm", lhs}, {"diffconv_norm", rhs}}; });
  }
  return r;
}

InstanceResult odd_moment_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const GSet a = algebra_set(index, rng, ctx, 512);
  const FuncR f = balanced_aa(a);
  for (int k : {1, 3, 5, 7}) {
    long double acc = 0;
    for (auto v : f.values()) acc += std::pow(static_cast<long double>(v), k);
    const double m = static_cast<double>(acc / static_cast<long double>(f.size()));
    observe_min(r, "min_moment", m);
    check(r, m + 1e-10, "negative odd moment", [&] { return json{{"set", set_to_json(a)}, {"k", k}, {"moment", m}}; });
  }
  return r;
}

InstanceResult mean_zeroing_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const GSet a = algebra_set(index, rng, ctx, 128);
  const ProbMeasure m = mu_of_set(a);
  const FuncC shifted = dft(FuncR(m).plus_constant_exact(-1, 1));
  const FuncC plain = dft(m.func());
  double e = std::abs(shifted[0]);
  for (std::size_t i = 1; i < plain.size(); ++i) e = std::max(e, std::abs(shifted[i] - plain[i]));
  observe_max(r, "max_error", e);
  check(r, 1e-12 - e, "transform of mu - 1 is not the zeroed transform of mu",
        [&] { return json{{"set", set_to_json(a)}, {"error", e}}; });
  return r;
}

InstanceResult digression_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    GSet a, c;
    if (ctx.exhaustive) {
      const Group g = Group::cyclic(7);
      a = mask_set(g, index / 127 + 1);
      c = mask_set(g, index % 127 + 1);
    } else {
      const Group g = random_group(rng, 64);
      a = random_set(rng, g, rng.uniform(0.05, 0.6));
      const GSet free = sumset(a, a).complement();
      c = (rng.coin(0.5) && !free.empty()) ? random_subset(rng, free, rng.uniform(0.2, 1.0))
                                           : random_set(rng, g, rng.uniform(0.05, 0.9));
    }
    const double in = holder_inner(a, c);
    if (in > 0.5 + 1e-12) {
      if (ctx.exhaustive) {
        r.discarded = true;
        return r;
      }
      ++r.regenerated;
      continue;
    }
    const FuncC fa = dft(mu_of_set(a).func()), fc = dft(mu_of_set(c).func());
    double sum = 0;
    for (std::size_t i = 1; i < fa.size(); ++i) sum += std::norm(fa[i]) * std::abs(fc[i]);
    observe_min(r, "min_nontrivial_sum", sum);
    check(r, sum - 0.5 + 1e-12, "sum over nontrivial characters below 1/2", [&] {
      return json{{"set", set_to_json(a)}, {"cset", set_to_json(c)}, {"inner", in}, {"sum", sum}};
    });
    return r;
  }
  r.discarded = true;
  return r;
}

// ---------------------------------------------------------------------------
// Proof steps

InstanceResult unbalancing_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const Group g = Group::cyclic(11);
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const GSet a = random_set(rng, g, rng.uniform(0.1, 0.9));
    if (a.card() == g.size()) {
      ++r.regenerated;
      continue;
    }
    static constexpr int kPs[] = {1, 2, 4};
    const int p = kPs[rng.below(3)];
    const FuncR f = balanced_aa(a);
    const double fn = lp_norm(f, p);
    const double eps = std::min(0.99, fn) * rng.uniform(0.25, 1.0);
    const auto payload = [&] { return json{{"set", set_to_json(a)}, {"p", p}, {"eps", eps}}; };
    UnbalanceOutcome out;
    try {
      out = unbalance(f, ProbMeasure::uniform(g).func(), eps, p, ctx.k, !ctx.calibrate);
    } catch (const ConstantBustingInstance& e) {
      fail(r, std::string("constant ") + e.constant + ": " + e.what(), payload());
      return r;
    }
    // Independent norms of mu_A o mu_A = f + 1.
    const std::vector<double> aa = diffconv_counts(a, a);
    const std::vector<double> ones(g.size(), 1.0);
    const double target = 1 + eps / 2;
    const double at = lp_weighted(aa, ones, out.p_prime);
    check(r, at - target * (1 - 1e-12), "returned p' misses 1 + eps/2", payload);
    if (out.p_prime > 1) {
      const double before = lp_weighted(aa, ones, out.p_prime - 1);
      check(r, target * (1 - 1e-12) - before, "p' is not minimal", payload);
    }
    const double scale = std::log(std::numbers::e / eps) / eps * p;
    observe_max(r, "k_unb", out.p_prime / scale);
    observe_max(r, "max_p_prime", out.p_prime);
    if (!ctx.calibrate) {
      check(r, out.bound - out.p_prime, "p' exceeds the ledger bound", payload);
    }
    return r;
  }
  r.discarded = true;
  return r;
}

// A_i(s) for a shift vector s.
GSet shifted_intersection(const GSet& b, const GSet& a, const std::vector<std::size_t>& s) {
  GSet out = b;
  for (auto t : s) out &= a.translate(t);
  return out;
}

// (1 / (|X| |Y|)) sum_{y in X, z in Y} f(z - y)
double pairing(const GSet& x, const GSet& y, const std::vector<double>& f) {
  const Group& g = x.group();
  long double acc = 0;
  for (auto a : x.indices()) {
    for (auto b : y.indices()) acc += f[g.sub(b, a)];
  }
  return static_cast<double>(acc / (static_cast<long double>(x.card()) * static_cast<long double>(y.card())));
}

struct DrcInstance {
  GSet a, b1, b2;
  int p;
};

DrcInstance drc_instance(std::size_t index, Rng& rng, const Context& ctx, std::size_t& regenerated) {
  DrcInstance d;
  if (ctx.exhaustive) {
    d.a = small_subset(index / 2);
    d.p = 1 + static_cast<int>(index % 2);
  } else {
    const Group g = rng.coin(0.7) ? Group::cyclic(static_cast<std::uint32_t>(rng.between(2, 12)))
                                  : Group(std::vector<std::uint32_t>{2, static_cast<std::uint32_t>(rng.between(2, 6))});
    d.a = random_set(rng, g, rng.uniform(0.1, 0.9));
    d.p = 1 + static_cast<int>(rng.below(2));
  }
  const Group& g = d.a.group();
  const std::vector<double> aa = diffconv_counts(d.a, d.a);
  // Hypothesis: mu_A o mu_A does not vanish on supp(mu_B1 o mu_B2).
  for (;;) {
    d.b1 = rng.coin(1.0 / 3) ? GSet::full(g) : random_set(rng, g, rng.uniform(0.3, 1.0));
    d.b2 = rng.coin(1.0 / 3) ? GSet::full(g) : random_set(rng, g, rng.uniform(0.3, 1.0));
    const std::vector<double> mu = diffconv_counts(d.b1, d.b2);
    bool meets = false;
    for (std::size_t x = 0; x < aa.size(); ++x) meets = meets || (aa[x] > 0 && mu[x] > 0);
    if (meets) return d;
    ++regenerated;
  }
}

json drc_payload(const DrcInstance& d) {
  return {{"set", set_to_json(d.a)}, {"b1", set_to_json(d.b1)}, {"b2", set_to_json(d.b2)}, {"p", d.p}};
}

// Advances s through G^p in lexicographic order; false after the last.
bool next_shift(std::vector<std::size_t>& s, std::size_t n) {
  for (std::size_t j = s.size(); j-- > 0;) {
    if (++s[j] < n) return true;
    s[j] = 0;
  }
  return false;
}

InstanceResult drc_identity_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const DrcInstance d = drc_instance(index, rng, ctx, r.regenerated);
  const Group& g = d.a.group();
  const std::size_t n = g.size();
  const FuncR f = random_real(rng, g, 0, 1);
  const auto payload = [&] {
    json j = drc_payload(d);
    j["f"] = func_json(f);
    return j;
  };
  const double alpha = d.a.density(), beta1 = d.b1.density(), beta2 = d.b2.density();
  const std::vector<double> aa = diffconv_counts(d.a, d.a);
  const std::vector<double> mu = diffconv_counts(d.b1, d.b2);
  long double lhs = 0, norm_pp = 0;
  for (std::size_t x = 0; x < n; ++x) {
    const long double w = static_cast<long double>(mu[x]) * std::pow(static_cast<long double>(aa[x]), d.p);
    lhs += w * f[x];
    norm_pp += w;
  }
  lhs /= static_cast<long double>(n);
  norm_pp /= static_cast<long double>(n);

  // E_s <1_{A1(s)} o 1_{A2(s)}, f>
  long double acc = 0;
  std::size_t count = 0;
  std::vector<std::size_t> s(static_cast<std::size_t>(d.p), 0);
  do {
    const GSet a1 = shifted_intersection(d.b1, d.a, s), a2 = shifted_intersection(d.b2, d.a, s);
    if (!a1.empty() && !a2.empty()) {
      acc += static_cast<long double>(pairing(a1, a2, f.values())) * static_cast<long double>(a1.card()) *
             static_cast<long double>(a2.card()) / (static_cast<long double>(n) * static_cast<long double>(n));
    }
    ++count;
  } while (next_shift(s, n));
  const long double rhs = std::pow(static_cast<long double>(alpha), -2 * d.p) / (beta1 * beta2) * acc /
                          static_cast<long double>(count);
  const double e = static_cast<double>(std::abs(lhs - rhs));
  observe_max(r, "max_identity_error", e);
  check(r, 1e-10 * rel_scale(static_cast<double>(lhs)) - e, "norm identity fails", payload);

  ShiftSearch search;
  search.mode = ShiftSearch::Exhaustive;
  search.max_scan = std::uint64_t{1} << 20;
  DrcResult out;
  try {
    out = drc(d.a, d.b1, d.b2, d.p, f, search);
  } catch (const SiftExhausted& ex) {
    fail(r, std::string("full scan of G^p found no certified shift: ") + ex.what(), payload());
    return r;
  }
  const GSet a1 = shifted_intersection(d.b1, d.a, out.shifts), a2 = shifted_intersection(d.b2, d.a, out.shifts);
  check(r, (a1 == out.a1 && a2 == out.a2) ? 0.0 : -1.0, "returned sets do not match the shifts", payload);
  const double eta = static_cast<double>(lhs / norm_pp);
  const double fv = pairing(a1, a2, f.values());
  check(r, 2 * eta - fv + 1e-12, "f conclusion fails", payload);
  check(r, 1e-10 - std::abs(fv - out.f_value), "reported f value does not recompute", payload);
  const double norm_p = static_cast<double>(std::pow(norm_pp, 1.0L / d.p));
  const double bound = 0.25 * std::pow(alpha * norm_p, 2 * d.p);
  const double prod = (static_cast<double>(a1.card()) / static_cast<double>(d.b1.card())) *
                      (static_cast<double>(a2.card()) / static_cast<double>(d.b2.card()));
  check(r, prod - bound * (1 - 1e-12), "density conclusion fails", payload);
  observe_min(r, "min_density_ratio", bound > 0 ? prod / bound : 0.0);
  return r;
}

InstanceResult sifting_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const DrcInstance d = drc_instance(index, rng, ctx, r.regenerated);
  const Group& g = d.a.group();
  const std::size_t n = g.size();
  const double eps = rng.coin(0.5) ? 0.5 : 0.75;
  const double delta = rng.coin(0.5) ? 0.25 : 0.5;
  const auto payload = [&] {
    json j = drc_payload(d);
    j["eps"] = eps;
    j["delta"] = delta;
    return j;
  };
  ShiftSearch search;
  search.mode = ShiftSearch::Exhaustive;
  search.max_scan = std::uint64_t{1} << 20;
  const int p_used = d.p + static_cast<int>(std::ceil(std::log(2 / delta) / eps));
  SiftResult out;
  try {
    out = sift(d.a, d.b1, d.b2, d.p, eps, delta, search);
  } catch (const SiftExhausted& ex) {
    const double full = std::pow(static_cast<double>(n), p_used);
    if (full <= static_cast<double>(search.max_scan)) {
      fail(r, std::string("full scan of G^p found no certified shift: ") + ex.what(), payload());
    } else {
      r.observed["budget_exhausted"] = 1;
    }
    return r;
  }
  r.observed["successes"] = 1;
  observe_max(r, "max_p_used", out.p_used);
  check(r, out.p_used == p_used ? 0.0 : -1.0, "p_used differs from p + ceil(log(2/delta)/eps)", payload);

  const std::vector<double> aa = diffconv_counts(d.a, d.a);
  const std::vector<double> mu = diffconv_counts(d.b1, d.b2);
  const double np = lp_weighted(aa, mu, d.p);
  GSet s(g);
  for (std::size_t x = 0; x < n; ++x) {
    if (aa[x] > (1 - eps) * np) s.insert(x);
  }
  check(r, s == out.s ? 0.0 : -1.0, "S does not recompute", payload);
  const GSet a1 = shifted_intersection(d.b1, d.a, out.drc.shifts), a2 = shifted_intersection(d.b2, d.a, out.drc.shifts);
  check(r, (!a1.empty() && !a2.empty() && a1 == out.drc.a1 && a2 == out.drc.a2) ? 0.0 : -1.0,
        "returned sets do not match the shifts", payload);
  if (a1.empty() || a2.empty()) return r;
  std::vector<double> ind(n, 0.0);
  for (auto x : s.indices()) ind[x] = 1.0;
  const double in = pairing(a1, a2, ind);
  observe_min(r, "min_inner", in);
  check(r, in - (1 - delta) + 1e-12, "<mu_A1 o mu_A2, 1_S> < 1 - delta", payload);
  check(r, 1e-10 - std::abs(in - out.inner_value), "reported inner value does not recompute", payload);
  const double nu = lp_weighted(aa, mu, p_used);
  const double bound = 0.25 * std::pow(d.a.density() * nu, 2 * p_used);
  const double prod = (static_cast<double>(a1.card()) / static_cast<double>(d.b1.card())) *
                      (static_cast<double>(a2.card()) / static_cast<double>(d.b2.card()));
  check(r, prod - bound * (1 - 1e-12), "density guarantee fails", payload);
  return r;
}

InstanceResult holder_run(std::size_t index, Rng& rng, const Context& ctx) {
  InstanceResult r;
  GSet a, c;
  double eps;
  if (ctx.exhaustive) {
    const Group g = Group::cyclic(7);
    a = mask_set(g, index / 127 + 1);
    c = mask_set(g, index % 127 + 1);
    eps = 0.25;
  } else {
    const Group g = random_group(rng, 64);
    a = random_set(rng, g, rng.uniform(0.1, 0.9));
    c = random_set(rng, g, rng.uniform(0.05, 0.9));
    static constexpr double kEps[] = {0.1, 0.25, 0.5};
    eps = kEps[rng.below(3)];
  }
  const auto payload = [&] { return json{{"set", set_to_json(a)}, {"cset", set_to_json(c)}, {"eps", eps}}; };
  LiftOutcome out;
  try {
    out = holder_lift(a, c, eps, ctx.k);
  } catch (const ConstantBustingInstance& e) {
    fail(r, std::string("constant ") + e.constant + ": " + e.what(), payload());
    return r;
  }
  const double in = holder_inner(a, c);
  check(r, 1e-10 - std::abs(in - out.inner_value), "inner value does not recompute", payload);
  const double gap = std::abs(in - 1.0);
  if (out.variant == LiftVariant::NearUniform) {
    r.observed["near_uniform"] = 1;
    check(r, eps * (1 + 1e-12) - gap, "near-uniform claim fails", payload);
    return r;
  }
  r.observed["lp"] = 1;
  check(r, gap - eps, "Lp returned although near-uniform holds", payload);
  const std::vector<double> cc = conv_counts(a, a);
  std::vector<double> f(cc.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = cc[i] - 1.0;
  const std::vector<double> ones(f.size(), 1.0);
  const double nrm = lp_weighted(f, ones, out.p);
  check(r, nrm - 0.5 * eps * (1 - 1e-12), "Lp norm below eps/2", payload);
  check(r, out.p_bound - out.p, "p above the bound", payload);
  if (out.p > 2) check(r, 0.5 * eps * (1 - 1e-12) - lp_weighted(f, ones, out.p - 2), "p is not minimal", payload);
  observe_max(r, "p_over_log", out.p / std::log(2.0 / c.density()));
  return r;
}

InstanceResult increment_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const std::uint32_t q = 3;
  const std::size_t dim = rng.coin(0.5) ? 2 : 3;
  const Group g(std::vector<std::uint32_t>(dim, q));
  const GSet a = random_set(rng, g, rng.uniform(0.2, 0.7));
  const GSet c = dilate_set(a, 2);
  const double eps = rng.coin(0.5) ? 0.25 : 0.5;
  const auto payload = [&] { return json{{"set", set_to_json(a)}, {"eps", eps}}; };
  IncrementConfig cfg;
  cfg.codim_max = 3;
  cfg.max_scan = std::uint64_t{1} << 16;
  IncrementOutcome out;
  try {
    out = density_increment_step(a, c, eps, cfg, ctx.k);
  } catch (const OracleBudgetExceeded&) {
    r.observed["budget"] = 1;
    return r;
  } catch (const SiftExhausted&) {
    r.observed["budget"] = 1;
    return r;
  } catch (const ConstantBustingInstance&) {
    r.observed["constant_busting"] = 1;
    return r;
  }
  if (out.variant == IncrementVariant::NearUniform) {
    r.observed["near_uniform"] = 1;
    check(r, eps * (1 + 1e-12) - std::abs(holder_inner(a, c) - 1.0), "near-uniform claim fails", payload);
    return r;
  }
  r.observed["increments"] = 1;
  const auto& checks = out.smoothing->v.checks;
  GSet v(g);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const Element e = g.element(x);
    bool in = true;
    for (const auto& h : checks) {
      std::uint64_t dot = 0;
      for (std::size_t j = 0; j < dim; ++j) dot += static_cast<std::uint64_t>(h[j]) * e.coords[j];
      if (dot % q != 0) in = false;
    }
    if (in) v.insert(x);
  }
  const std::size_t expect = static_cast<std::size_t>(std::pow(q, dim - checks.size()));
  check(r, (v.card() == expect && v == out.smoothing->v.bohr.members()) ? 0.0 : -1.0,
        "V does not match its parity checks", payload);
  bool closed = v.contains(0);
  for (auto x : v.indices()) {
    for (auto y : v.indices()) closed = closed && v.contains(g.add(x, y));
  }
  check(r, closed ? 0.0 : -1.0, "V is not a subgroup", payload);
  const std::size_t cnt = a.intersect_count(v.translate(out.translate));
  const long double lhs = static_cast<long double>(cnt) * static_cast<long double>(g.size());
  const long double rhs = (1.0L + eps / ctx.k.c_inc) * static_cast<long double>(a.card()) * static_cast<long double>(v.card());
  check(r, static_cast<double>((lhs - rhs) / rhs), "increment certificate fails", payload);
  check(r, 1e-12 - std::abs(out.new_density - static_cast<double>(cnt) / static_cast<double>(v.card())),
        "reported density does not recompute", payload);
  return r;
}

// Relative densities |A cap (x + X)| / |X| for every x, by counting.
std::vector<double> densities(const GSet& a, const GSet& x) {
  const Group& g = a.group();
  std::vector<double> out(g.size(), 0.0);
  const auto xs = x.indices();
  for (std::size_t t = 0; t < g.size(); ++t) {
    std::size_t c = 0;
    for (auto y : xs) c += a.contains(g.add(t, y)) ? 1 : 0;
    out[t] = static_cast<double>(c) / static_cast<double>(xs.size());
  }
  return out;
}

bool trichotomy_holds(const GSet& a, const GSet& bp, const GSet& bpp, double alpha, double eps) {
  const auto d1 = densities(a, bp), d2 = densities(a, bpp);
  for (std::size_t x = 0; x < d1.size(); ++x) {
    if (d1[x] >= (1 + eps / 2) * alpha || d2[x] >= (1 + eps / 2) * alpha) return true;
    if (d1[x] >= (1 - eps) * alpha && d2[x] >= (1 - eps) * alpha) return true;
  }
  return false;
}

// B regular, A inside B.
struct RelInstance {
  BohrSet b;
  GSet a;
  double alpha;
};

RelInstance rel_instance(Rng& rng, std::uint32_t n, std::size_t max_rank) {
  RelInstance ri;
  ri.b = regular_dilate(random_bohr(rng, n, max_rank, 0.5, 2.0)).set;
  ri.a = random_subset(rng, ri.b.members(), rng.uniform(0.2, 0.95));
  ri.alpha = static_cast<double>(ri.a.card()) / static_cast<double>(ri.b.size());
  return ri;
}

InstanceResult bour_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const RelInstance ri = rel_instance(rng, 101, 2);
  const double eps = rng.coin(0.5) ? 0.25 : 0.5;
  const double d = static_cast<double>(ri.b.rank());
  const double rho = ctx.k.c_narrow * ri.alpha * eps / d;
  const BohrSet bp = regular_dilate(dilate(ri.b, rho * rng.uniform(0.5, 1.0))).set;
  const BohrSet bpp = regular_dilate(dilate(bp, rng.uniform(0.3, 1.0))).set;
  const auto payload = [&] {
    return json{{"b", bohr_to_json(ri.b)}, {"set", set_to_json(ri.a)}, {"bp", bohr_to_json(bp)},
                {"bpp", bohr_to_json(bpp)}, {"eps", eps}};
  };
  NarrowOutcome out;
  try {
    out = bour_narrow(ri.a, ri.b, bp, bpp, eps, ctx.k);
  } catch (const ConstantBustingInstance& e) {
    fail(r, std::string("constant ") + e.constant + ": " + e.what(), payload());
    return r;
  }
  const auto d1 = densities(ri.a, bp.members()), d2 = densities(ri.a, bpp.members());
  const double up = (1 + eps / 2) * ri.alpha * (1 - 1e-12), low = (1 - eps) * ri.alpha * (1 - 1e-12);
  switch (out.variant) {
    case NarrowVariant::IncOnBprime:
      r.observed["inc_bprime"] = 1;
      check(r, d1[out.x] - up, "increment on B' does not recompute", payload);
      break;
    case NarrowVariant::IncOnBdoubleprime:
      r.observed["inc_bdoubleprime"] = 1;
      check(r, d2[out.x] - up, "increment on B'' does not recompute", payload);
      break;
    case NarrowVariant::Translate:
      r.observed["translate"] = 1;
      check(r, std::min(d1[out.x], d2[out.x]) - low, "translate densities do not recompute", payload);
      break;
  }
  // Exploratory: the same trichotomy with the much looser dilation c = 1/4.
  const BohrSet lp = regular_dilate(dilate(ri.b, 0.25 * ri.alpha * eps / d * rng.uniform(0.5, 1.0))).set;
  const BohrSet lpp = regular_dilate(dilate(lp, rng.uniform(0.3, 1.0))).set;
  observe_min(r, "loose_c_trichotomy_holds", trichotomy_holds(ri.a, lp.members(), lpp.members(), ri.alpha, eps) ? 1 : 0);
  return r;
}

InstanceResult lp_orth_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const std::uint32_t n = random_prime(rng, 101, 499);
    const RelInstance ri = rel_instance(rng, n, 2);
    static constexpr double kEps[] = {0.25, 0.5, 1.0};
    const double eps = kEps[rng.below(3)];
    const int p = rng.coin(0.5) ? 2 : 4;
    const double rho = ctx.k.c_bohr * eps * ri.alpha / static_cast<double>(ri.b.rank());
    const BohrSet half = dilate(ri.b, 0.5 * rho * rng.uniform(0.5, 1.0));
    const ProbMeasure mh = mu_of_set(half.members());
    const FuncR nu = diffconv(mh, mh);
    const double mu_b = static_cast<double>(ri.b.size()) / static_cast<double>(n);
    const FuncR diff = FuncR(mu_of_set(ri.a)) - FuncR(mu_of_set(ri.b.members()));
    if (lp_norm(diffconv(diff, diff), p, nu) < eps / mu_b) {
      ++r.regenerated;
      continue;
    }
    const auto payload = [&] {
      return json{{"b", bohr_to_json(ri.b)}, {"set", set_to_json(ri.a)}, {"nu_support", bohr_to_json(half)},
                  {"eps", eps}, {"p", p}};
    };
    BohrUnbalanceOutcome out;
    try {
      out = bohr_unbalance(ri.a, ri.b, nu, eps, p, ctx.k, false);
    } catch (const ConstantBustingInstance& e) {
      fail(r, std::string("constant ") + e.constant + ": " + e.what(), payload());
      return r;
    }
    const std::vector<double> aa = diffconv_counts(ri.a, ri.a);
    const double nrm = lp_weighted(aa, nu.values(), out.p_prime);
    const double target = (1 + eps / 4) / mu_b;
    check(r, (nrm - target * (1 - 1e-12)) / target, "||mu_A o mu_A||_{p'(nu)} below (1 + eps/4) / mu(B)", payload);
    observe_max(r, "p_prime_over_p", static_cast<double>(out.p_prime) / p);
    return r;
  }
  r.discarded = true;
  return r;
}

InstanceResult posdef_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const auto n = static_cast<std::uint32_t>(rng.between(50, 512));
  const BohrSet b = regular_dilate(random_bohr(rng, n, 2, 0.5, 2.0)).set;
  const BohrSet bp = regular_dilate(dilate(b, ctx.k.c_posdef / static_cast<double>(b.rank()))).set;
  const BohrSet bpp = regular_dilate(dilate(bp, ctx.k.c_posdef / static_cast<double>(bp.rank()))).set;
  const FuncR f = random_real(rng, b.group(), -1, 1);
  const ProbMeasure m1 = mu_of_set(bp.members()), m2 = mu_of_set(bpp.members());
  const FuncR nu = conv(diffconv(m1, m1), diffconv(m2, m2));
  const FuncR ff = diffconv(f, f), fsf = conv(f, f);
  for (int p : {2, 4}) {
    const double lhs = lp_norm(ff, p, nu);
    const double rhs = lp_norm(fsf, p, mu_of_set(b.members()).func());
    observe_min(r, "min_ratio", rhs > 0 ? lhs / rhs : 1.0);
    check(r, lhs - 0.5 * rhs + 1e-10, "||f o f||_{p(nu)} < ||f * f||_{p(mu_B)} / 2", [&] {
      return json{{"b", bohr_to_json(b)}, {"bp", bohr_to_json(bp)}, {"bpp", bohr_to_json(bpp)}, {"f", func_json(f)},
                  {"p", p}};
    });
  }
  return r;
}

InstanceResult holder_bohr_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const std::uint32_t n = random_prime(rng, 101, 499);
  const RelInstance ri = rel_instance(rng, n, 2);
  const double eps = rng.coin(0.5) ? 0.25 : 0.5;
  const double rho = ctx.k.c_bohr * eps * ri.alpha / static_cast<double>(ri.b.rank());
  const BohrSet bp = regular_dilate(dilate(ri.b, rho * rng.uniform(0.5, 1.0))).set;
  const GSet c = random_subset(rng, bp.members(), rng.uniform(0.3, 1.0));
  const auto payload = [&] {
    return json{{"b", bohr_to_json(ri.b)}, {"set", set_to_json(ri.a)}, {"bp", bohr_to_json(bp)},
                {"cset", set_to_json(c)}, {"eps", eps}};
  };
  const BohrContext bc{&ri.b, &bp};
  LiftOutcome out;
  try {
    out = holder_lift(ri.a, c, eps, ctx.k, &bc);
  } catch (const ConstantBustingInstance& e) {
    fail(r, std::string("constant ") + e.constant + ": " + e.what(), payload());
    return r;
  }
  const Group& g = ri.b.group();
  const double target = static_cast<double>(n) / static_cast<double>(ri.b.size());
  const double in = holder_inner(ri.a, c);
  if (out.variant == LiftVariant::NearUniform) {
    r.observed["near_uniform"] = 1;
    check(r, (eps * target * (1 + 1e-12) - std::abs(in - target)) / target, "near-uniform claim fails", payload);
    return r;
  }
  r.observed["lp"] = 1;
  const std::vector<double> aa = conv_counts(ri.a, ri.a), ab = conv_counts(ri.a, ri.b.members()),
                            bb = conv_counts(ri.b.members(), ri.b.members());
  std::vector<double> f(g.size()), w(g.size(), 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) f[x] = aa[x] - 2 * ab[x] + bb[x];
  for (auto x : bp.members().indices()) w[x] = static_cast<double>(n) / static_cast<double>(bp.size());
  const double nrm = lp_weighted(f, w, out.p);
  check(r, (nrm - 0.5 * eps * target * (1 - 1e-12)) / target, "Lp norm below eps/2 mu(B)^-1", payload);
  check(r, out.p_bound - out.p, "p above the bound", payload);
  return r;
}

// ---------------------------------------------------------------------------
// Bohr calculus

InstanceResult bohrsiz_run(std::size_t, Rng& rng, const Context&) {
  InstanceResult r;
  const auto n = static_cast<std::uint32_t>(rng.between(10, 10000));
  const BohrSet b = random_bohr(rng, n, 3, 0.05, 2.0);
  const double d = static_cast<double>(b.rank());
  std::size_t full = 0;
  for (std::uint64_t x = 0; x < n; ++x) full += in_bohr(n, b.freqs(), b.widths(), x) ? 1 : 0;
  const auto payload = [&] { return json{{"bohr", bohr_to_json(b)}}; };
  check(r, full == b.size() ? 0.0 : -1.0, "membership count disagrees with the oracle", payload);
  GSet prev(b.group());
  for (int i = 1; i <= 9; ++i) {
    const double rho = 0.1 * i;
    std::size_t cnt = 0;
    for (std::uint64_t x = 0; x < n; ++x) cnt += in_bohr(n, b.freqs(), b.widths(), x, rho) ? 1 : 0;
    const double bound = std::pow(rho / 4, d) * static_cast<double>(b.size());
    observe_min(r, "min_ratio", static_cast<double>(cnt) / bound);
    check(r, (static_cast<double>(cnt) - bound) / static_cast<double>(b.size()), "|B_rho| < (rho/4)^d |B|",
          [&] { return json{{"bohr", bohr_to_json(b)}, {"rho", rho}}; });
    const BohrSet dil = dilate(b, rho);
    check(r, (dil.size() == cnt && prev.subset_of(dil.members())) ? 0.0 : -1.0, "dilates are not nested",
          [&] { return json{{"bohr", bohr_to_json(b)}, {"rho", rho}}; });
    prev = dil.members();
  }
  return r;
}

InstanceResult bohrreg_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const auto n = static_cast<std::uint32_t>(rng.between(10, 10000));
  const BohrSet b = random_bohr(rng, n, 3, 0.05, 2.0);
  const auto payload = [&] { return json{{"bohr", bohr_to_json(b)}}; };
  RegularDilate rd;
  try {
    rd = regular_dilate(b, ctx.k.reg_const);
  } catch (const InternalError& e) {
    fail(r, std::string("no regular dilate: ") + e.what(), payload());
    return r;
  }
  check(r, std::min(rd.rho - 0.5, 1.0 - rd.rho), "rho outside [1/2, 1]", payload);
  BohrSet fresh = bohr_build(b.group(), rd.set.freqs(), rd.set.widths());
  const Regularity reg = is_regular(fresh, ctx.k.reg_const);
  observe_min(r, "min_rho", rd.rho);
  check(r, reg.regular ? reg.margin : -1.0, "returned dilate is not regular", payload);
  return r;
}

// (1 / |B|) sum_x |sum_y w(y) 1_B(x - y) - 1_B(x)| = ||mu_B * mu - mu_B||_1
double regconv_l1(const GSet& b, const std::vector<std::pair<std::size_t, double>>& w) {
  const Group& g = b.group();
  std::vector<double> acc(g.size(), 0.0);
  const auto bs = b.indices();
  for (const auto& [y, wy] : w) {
    for (auto x : bs) acc[g.add(x, y)] += wy;
  }
  long double s = 0;
  for (std::size_t x = 0; x < g.size(); ++x) s += std::abs(acc[x] - (b.contains(x) ? 1.0 : 0.0));
  return static_cast<double>(s / static_cast<long double>(bs.size()));
}

InstanceResult regconv_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  const auto n = static_cast<std::uint32_t>(rng.between(50, 2000));
  const BohrSet b = regular_dilate(random_bohr(rng, n, 3, 0.3, 2.0), ctx.k.reg_const).set;
  const double d = static_cast<double>(b.rank());
  const double rho = std::exp(rng.uniform(std::log(1e-3), std::log(0.9)));
  const GSet supp = dilate(b, rho).members();
  std::vector<std::pair<std::size_t, double>> w;
  const bool uniform = rng.coin(0.5);
  double total = 0;
  for (auto y : supp.indices()) {
    const double v = uniform ? 1.0 : rng.uniform(0.1, 1.0);
    w.emplace_back(y, v);
    total += v;
  }
  for (auto& e : w) e.second /= total;
  const double l1 = regconv_l1(b.members(), w);
  const double kk = l1 / (rho * d);
  observe_max(r, "k_regconv", kk);
  const auto payload = [&] { return json{{"bohr", bohr_to_json(b)}, {"rho", rho}, {"uniform", uniform}, {"K", kk}}; };
  if (rho <= 1 / (ctx.k.reg_const * d)) {
    check(r, (2 * ctx.k.reg_const - kk) / (2 * ctx.k.reg_const), "K above 2 R on the regular range", payload);
  }
  if (!ctx.calibrate) check(r, ctx.k.k_regconv * (1 + 1e-9) - kk, "K above the ledger value", payload);
  return r;
}

// mu_B <= 2 mu_{B_{1+L rho}} * mu_{B'}^{(L)} pointwise, B' = B_rho, decided
// in integers: |B1| |B'|^L 1_B(x) <= 2 |B| sum_y 1_{B1}(x - y) c_L(y).
bool covering_holds(const BohrSet& b, double rho, int L) {
  const Group& g = b.group();
  const GSet b1 = dilate(b, 1 + L * rho).members();
  const GSet bp = dilate(b, rho).members();
  std::vector<std::uint64_t> c(g.size(), 0);
  c[0] = 1;
  const auto ps = bp.indices();
  for (int l = 0; l < L; ++l) {
    std::vector<std::uint64_t> next(g.size(), 0);
    for (std::size_t y = 0; y < g.size(); ++y) {
      if (c[y] == 0) continue;
      for (auto t : ps) next[g.add(y, t)] += c[y];
    }
    c = std::move(next);
  }
  std::vector<std::pair<std::size_t, std::uint64_t>> supp;
  for (std::size_t y = 0; y < g.size(); ++y) {
    if (c[y] != 0) supp.emplace_back(y, c[y]);
  }
  unsigned __int128 lhs = b1.card();
  for (int l = 0; l < L; ++l) lhs *= ps.size();
  for (auto x : b.members().indices()) {
    unsigned __int128 s = 0;
    for (const auto& [y, cy] : supp) s += b1.contains(g.sub(x, y)) ? cy : 0;
    if (lhs > 2 * static_cast<unsigned __int128>(b.size()) * s) return false;
  }
  return true;
}

InstanceResult fourierbohr_run(std::size_t, Rng& rng, const Context& ctx) {
  InstanceResult r;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const auto n = static_cast<std::uint32_t>(rng.between(50, 2000));
    const BohrSet b = regular_dilate(random_bohr(rng, n, 2, 0.3, 2.0), ctx.k.reg_const).set;
    if (2 * b.size() >= n) {
      ++r.regenerated;
      continue;
    }
    const double d = static_cast<double>(b.rank());
    const int L = 1 + static_cast<int>(rng.below(3));
    auto ratios = bohr_ratios(b.group(), b.freqs(), b.widths());
    std::sort(ratios.begin(), ratios.end());
    const double kappa = ratios[2 * b.size()] / (1 + kBohrTol) - 1;
    // The threshold itself is excluded: B_{1 + kappa} already has more than 2|B| points.
    const double c_inst = 0.999 * kappa * d;
    observe_min(r, "c_cover", c_inst);
    const auto payload = [&] { return json{{"bohr", bohr_to_json(b)}, {"L", L}, {"c_inst", c_inst}}; };
    check(r, kappa * d - 1 / ctx.k.reg_const, "doubling threshold below 1/(R d) for a regular set", payload);
    const double at_threshold = std::min(0.999 * kappa / L, 1.0 / L);
    check(r, covering_holds(b, at_threshold, L) ? 0.0 : -1.0, "covering fails below the doubling threshold", payload);
    if (!ctx.calibrate) {
      const double rho = std::min(ctx.k.c_cover / (L * d), 1.0 / L);
      check(r, covering_holds(b, rho, L) ? 0.0 : -1.0, "covering fails at the ledger constant", payload);
      check(r, c_inst - ctx.k.c_cover * (1 - 1e-9), "instance constant below the ledger value", payload);
    }
    return r;
  }
  r.discarded = true;
  return r;
}

InstanceResult bohr_ap_run(std::size_t, Rng& rng, const Context&) {
  InstanceResult r;
  const std::uint32_t n = random_prime(rng, 11, 10000);
  const BohrSet b = random_bohr(rng, n, 3, 0.05, 2.0);
  const ExtractedAP ap = extract_ap(b);
  const auto payload = [&] { return json{{"bohr", bohr_to_json(b)}}; };
  bool inside = true;
  for (std::size_t j = 0; j < ap.run.length; ++j) {
    inside = inside && in_bohr(n, b.freqs(), b.widths(), ap.run.term(b.group(), j));
  }
  check(r, inside ? 0.0 : -1.0, "progression leaves B", payload);
  check(r, (ap.run.length == 1 || ap.run.step != 0) ? 0.0 : -1.0, "zero step", payload);
  const double d = static_cast<double>(b.rank());
  const double rho = 4.0 * std::pow(2.0 / static_cast<double>(b.size()), 1.0 / d);
  const auto bound = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(1.0 / rho)));
  check(r, static_cast<double>(ap.run.length) - static_cast<double>(bound), "progression shorter than the lemma bound",
        payload);
  observe_max(r, "max_length_over_bound", static_cast<double>(ap.run.length) / static_cast<double>(bound));
  return r;
}

std::vector<Suite> build() {
  std::vector<Suite> v;
  auto add = [&](std::string id, std::size_t def, std::size_t exh, auto run) {
    Suite s;
    s.id = std::move(id);
    s.default_instances = def;
    s.exhaustive_count = exh;
    s.run = run;
    v.push_back(std::move(s));
    return &v.back();
  };
  add("adjoint", 200, 0, adjoint_run)->prelude = adjoint_prelude;
  add("conv-fourier", 200, 0, conv_fourier_run);
  add("moment-spectrum", 200, 0, moment_spectrum_run);
  add("spectral-nonneg", 200, kSmallSubsets, spectral_nonneg_run)->aggregate = {{"min_spectrum", Agg::Min}};
  add("lp-monotone", 200, kSmallSubsets, lp_monotone_run);
  add("odd-moment", 200, kSmallSubsets, odd_moment_run)->aggregate = {{"min_moment", Agg::Min}};
  add("mean-zeroing", 200, kSmallSubsets, mean_zeroing_run);
  add("fourier-digression", 200, 127 * 127, digression_run)->aggregate = {{"min_nontrivial_sum", Agg::Min}};
  {
    Suite* s = add("unbalancing", 1000, 0, unbalancing_run);
    s->ledger_key = "k_unb";
    s->ledger_field = "k_unb";
  }
  add("drc-identity", 200, 2 * kSmallSubsets, drc_identity_run)->aggregate = {{"min_density_ratio", Agg::Min}};
  add("sifting", 200, 2 * kSmallSubsets, sifting_run)->aggregate = {
      {"min_inner", Agg::Min}, {"successes", Agg::Sum}, {"budget_exhausted", Agg::Sum}};
  add("holder", 200, 127 * 127, holder_run)->aggregate = {{"near_uniform", Agg::Sum}, {"lp", Agg::Sum}};
  add("increment", 50, 0, increment_run)->aggregate = {{"near_uniform", Agg::Sum},
                                                       {"increments", Agg::Sum},
                                                       {"budget", Agg::Sum},
                                                       {"constant_busting", Agg::Sum}};
  add("bour", 50, 0, bour_run)->aggregate = {{"inc_bprime", Agg::Sum},
                                             {"inc_bdoubleprime", Agg::Sum},
                                             {"translate", Agg::Sum},
                                             {"loose_c_trichotomy_holds", Agg::Min}};
  add("lp-orth", 100, 0, lp_orth_run);
  add("posdef", 100, 0, posdef_run)->aggregate = {{"min_ratio", Agg::Min}};
  add("holder-bohr", 100, 0, holder_bohr_run)->aggregate = {{"near_uniform", Agg::Sum}, {"lp", Agg::Sum}};
  add("bohrsiz", 100, 0, bohrsiz_run)->aggregate = {{"min_ratio", Agg::Min}};
  add("bohrreg", 100, 0, bohrreg_run)->aggregate = {{"min_rho", Agg::Min}};
  {
    Suite* s = add("regconv", 100, 0, regconv_run);
    s->ledger_key = "k_regconv";
    s->ledger_field = "k_regconv";
  }
  {
    Suite* s = add("fourierbohr", 100, 0, fourierbohr_run);
    s->aggregate = {{"c_cover", Agg::Min}};
    s->ledger_key = "c_cover";
    s->ledger_field = "c_cover";
    s->ledger_upper = false;
  }
  add("bohr-ap", 100, 0, bohr_ap_run);
  return v;
}

}  // namespace

const std::vector<Suite>& registry() {
  static const std::vector<Suite> r = build();
  return r;
}

}  // namespace km::suites
