#include "km/bohr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "km/error.hpp"
#include "km/fourier.hpp"

namespace km {

std::vector<double> character_distance(const Group& g, std::size_t gamma) {
  const std::uint64_t L = order_lcm(g);
  const Element c = g.element(gamma);
  std::vector<std::uint64_t> w(g.rank());
  for (std::size_t j = 0; j < g.rank(); ++j) {
    const std::uint64_t m = g.orders()[j];
    w[j] = (c.coords[j] % m) * (L / m) % L;
  }
  std::vector<double> out(g.size());
  // Odometer over the lexicographic index; phase is sum_j x_j w_j mod L.
  std::vector<std::uint32_t> digit(g.rank(), 0);
  std::uint64_t phase = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::uint64_t t = std::min(phase, L - phase);
    out[i] = t == 0 ? 0.0
                    : 2.0 * std::sin(std::numbers::pi * static_cast<double>(t) / static_cast<double>(L));
    for (std::size_t j = g.rank(); j-- > 0;) {
      phase = (phase + w[j]) % L;
      if (++digit[j] < g.orders()[j]) break;
      digit[j] = 0;
      // m_j steps of w_j wrap to 0 mod L.
    }
  }
  return out;
}

std::vector<double> bohr_ratios(const Group& g, const std::vector<std::size_t>& freqs,
                                const std::vector<double>& widths) {
  std::vector<double> r(g.size(), 0.0);
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const auto v = character_distance(g, freqs[k]);
    const double nu = widths[k];
    for (std::size_t i = 0; i < r.size(); ++i) {
      double q;
      if (v[i] == 0.0) {
        q = 0.0;
      } else if (nu == 0.0) {
        q = std::numeric_limits<double>::infinity();
      } else {
        q = v[i] / nu;
      }
      r[i] = std::max(r[i], q);
    }
  }
  return r;
}

BohrSet bohr_build(const Group& g, std::vector<std::size_t> freqs, std::vector<double> widths) {
  if (freqs.size() != widths.size()) throw DomainError("Bohr set needs one width per frequency");
  for (auto w : widths) {
    if (!(w >= 0.0 && w <= 2.0)) throw DomainError("Bohr width out of [0, 2]");
  }
  for (auto f : freqs) {
    if (f >= g.size()) throw DomainError("frequency index out of range");
  }
  BohrSet b;
  const auto r = bohr_ratios(g, freqs, widths);
  GSet m(g);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= 1.0 + kBohrTol) m.insert(i);
  }
  b.freqs_ = std::move(freqs);
  b.widths_ = std::move(widths);
  b.members_ = std::move(m);
  return b;
}

BohrSet dilate(const BohrSet& b, double rho) {
  if (!(rho > 0.0)) throw DomainError("dilation factor must be positive");
  std::vector<double> w(b.widths());
  for (auto& x : w) x = std::clamp(x * rho, 0.0, 2.0);
  return bohr_build(b.group(), b.freqs(), std::move(w));
}

namespace {

// Regularity of the Bohr set whose ratio multiset is sorted[i] / scale.
Regularity regularity_sorted(const std::vector<double>& sorted, double scale, std::size_t rank,
                             double reg_const) {
  const double d = static_cast<double>(std::max<std::size_t>(rank, 1));
  const double K = 1.0 / (reg_const * d);
  const double thr = 1.0 + kBohrTol;
  // count of ratios r/scale <= t, i.e. r <= t * scale
  auto count_le = [&](double t) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t * scale) - sorted.begin());
  };
  const double size = count_le(thr);
  double margin = count_le((1.0 - K) * thr) / size;             // kappa = -K
  margin = std::min(margin, 2.0 - count_le((1.0 + K) * thr) / size);  // kappa = +K
  auto lo = std::upper_bound(sorted.begin(), sorted.end(), (1.0 - K) * thr * scale);
  auto hi = std::upper_bound(sorted.begin(), sorted.end(), (1.0 + K) * thr * scale);
  for (auto it = lo; it != hi;) {
    const double rb = *it / scale;
    const double kappa = rb / thr - 1.0;
    if (kappa <= 0.0) {
      const double below = static_cast<double>(it - sorted.begin());
      margin = std::min(margin, (below - (1.0 - reg_const * d * -kappa) * size) / size);
    } else {
      const double upto = static_cast<double>(std::upper_bound(it, sorted.end(), *it) - sorted.begin());
      margin = std::min(margin, ((1.0 + reg_const * d * kappa) * size - upto) / size);
    }
    it = std::upper_bound(it, hi, *it);
  }
  return {margin >= 0.0, margin};
}

std::vector<double> sorted_finite(std::vector<double> r) {
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

Regularity regularity_of(const BohrSet& b, double reg_const) {
  if (b.rank() == 0) return {true, 0.0};
  const auto sorted = sorted_finite(bohr_ratios(b.group(), b.freqs(), b.widths()));
  return regularity_sorted(sorted, 1.0, b.rank(), reg_const);
}

Regularity is_regular(BohrSet& b, double reg_const) {
  b.regularity_ = regularity_of(b, reg_const);
  return *b.regularity_;
}

RegularDilate regular_dilate(const BohrSet& b, double reg_const) {
  if (b.rank() == 0) throw DomainError("regular_dilate needs rank >= 1");
  const auto sorted = sorted_finite(bohr_ratios(b.group(), b.freqs(), b.widths()));
  std::vector<double> cand{1.0};
  {
    // Midpoints of gaps between consecutive distinct ratios inside [1/2, 1].
    std::vector<double> pts{0.5, 1.0};
    for (double r : sorted) {
      if (r > 0.5 && r < 1.0) pts.push_back(r);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<std::pair<double, double>> gaps;
    for (std::size_t i = 1; i < pts.size(); ++i) gaps.emplace_back(pts[i] - pts[i - 1], 0.5 * (pts[i] + pts[i - 1]));
    std::vector<double> mids;
    for (auto& [w, m] : gaps) mids.push_back(m);
    std::sort(mids.rbegin(), mids.rend());
    cand.insert(cand.end(), mids.begin(), mids.end());
    for (int i = 1; i <= 4096; ++i) cand.push_back(1.0 - 0.5 * i / 4096.0);
  }
  double best_margin = -1e300;
  double best_rho = 1.0;
  for (double rho : cand) {
    const Regularity pre = regularity_sorted(sorted, rho, b.rank(), reg_const);
    if (pre.margin > best_margin) {
      best_margin = pre.margin;
      best_rho = rho;
    }
    if (!pre.regular) continue;
    BohrSet d = dilate(b, rho);
    if (is_regular(d, reg_const).regular) return {std::move(d), rho};
  }
  throw InternalError("regular_dilate: no regular dilate in [1/2, 1] (rank " + std::to_string(b.rank()) +
                      ", |B| = " + std::to_string(b.size()) + ", best rho " + std::to_string(best_rho) +
                      " margin " + std::to_string(best_margin) + ")");
}

namespace {

std::int64_t mod_inverse(std::int64_t k, std::int64_t m) {
  std::int64_t a = ((k % m) + m) % m, b = m, x0 = 1, x1 = 0;
  while (b != 0) {
    const std::int64_t q = a / b;
    std::tie(a, b) = std::make_pair(b, a - q * b);
    std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
  }
  if (a != 1) throw DomainError("dilation factor not invertible");
  return ((x0 % m) + m) % m;
}

}  // namespace

BohrSet freq_dilate(const BohrSet& b, std::int64_t k) {
  const Group& g = b.group();
  if (gcd_with_order(k, g.size()) != 1) {
    throw DomainError("dilation factor " + std::to_string(k) + " is not coprime to |G| = " +
                      std::to_string(g.size()));
  }
  std::vector<std::int64_t> inv(g.rank());
  for (std::size_t j = 0; j < g.rank(); ++j) {
    const auto m = static_cast<std::int64_t>(g.orders()[j]);
    inv[j] = m == 1 ? 0 : mod_inverse(k, m);
  }
  std::vector<std::size_t> freqs;
  for (auto f : b.freqs()) {
    const Element c = g.element(f);
    std::vector<std::int64_t> nc(g.rank());
    for (std::size_t j = 0; j < g.rank(); ++j) nc[j] = static_cast<std::int64_t>(c.coords[j]) * inv[j];
    freqs.push_back(g.index_of(nc));
  }
  BohrSet out = bohr_build(g, std::move(freqs), b.widths());
  out.regularity_ = b.regularity_;
  return out;
}

BohrSet join(const BohrSet& b, const BohrSet& b2) {
  if (!(b.group() == b2.group())) throw GroupMismatch();
  std::vector<std::size_t> freqs(b.freqs());
  std::vector<double> widths(b.widths());
  for (std::size_t k = 0; k < b2.rank(); ++k) {
    auto it = std::find(freqs.begin(), freqs.end(), b2.freqs()[k]);
    if (it == freqs.end()) {
      freqs.push_back(b2.freqs()[k]);
      widths.push_back(b2.widths()[k]);
    } else {
      auto& w = widths[static_cast<std::size_t>(it - freqs.begin())];
      w = std::min(w, b2.widths()[k]);
    }
  }
  return bohr_build(b.group(), std::move(freqs), std::move(widths));
}

bool APRun::inside(const GSet& s) const {
  const Group& g = s.group();
  std::size_t x = start;
  for (std::size_t j = 0; j < length; ++j) {
    if (!s.contains(x)) return false;
    x = g.add(x, step);
  }
  return true;
}

ExtractedAP extract_ap(const BohrSet& b) {
  const Group& g = b.group();
  const std::size_t N = g.size();
  if (!g.is_cyclic() || !is_prime(N)) {
    throw DomainError("extract_ap requires Z/NZ with N prime, got " + g.to_string());
  }
  const double d = static_cast<double>(std::max<std::size_t>(b.rank(), 1));
  const double rho = 4.0 * std::pow(2.0 / static_cast<double>(b.size()), 1.0 / d);
  const std::size_t bound = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(1.0 / rho)));

  const GSet& m = b.members();
  const auto r = bohr_ratios(g, b.freqs(), b.widths());
  std::vector<std::size_t> steps;
  for (auto x : m.indices()) {
    if (x != 0 && x <= N - x) steps.push_back(x);
  }
  std::stable_sort(steps.begin(), steps.end(), [&](std::size_t a, std::size_t c) { return r[a] < r[c]; });
  if (steps.size() > 256) steps.resize(256);

  APRun best{0, 0, 1};
  for (auto x : steps) {
    // Walk the cycle 0, x, 2x, ... which covers Z/NZ since N is prime.
    std::size_t first_gap = N;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < N; ++j, pos = g.add(pos, x)) {
      if (!m.contains(pos)) {
        first_gap = j;
        break;
      }
    }
    if (first_gap == N) {
      best = {0, x, N};
      break;
    }
    // Scan N positions starting right after a gap so runs do not wrap.
    std::size_t run = 0, run_start = 0;
    std::size_t at = g.scale(static_cast<std::int64_t>(first_gap + 1), x);
    for (std::size_t j = 0; j < N; ++j, at = g.add(at, x)) {
      if (m.contains(at)) {
        if (run == 0) run_start = at;
        ++run;
        if (run > best.length) best = {run_start, x, run};
      } else {
        run = 0;
      }
    }
  }
  if (best.length < bound) {
    throw InternalError("extract_ap: best run " + std::to_string(best.length) + " is below the bound " +
                        std::to_string(bound));
  }
  return {best, bound};
}

}  // namespace km
