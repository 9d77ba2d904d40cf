#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "km/bohr.hpp"
#include "km/error.hpp"
#include "km/rng.hpp"
#include "oracles.hpp"

using namespace km;

namespace {

std::vector<std::size_t> members(const BohrSet& b) { return b.members().indices(); }

std::vector<std::size_t> sorted_mod(std::vector<int> v, int n) {
  std::vector<std::size_t> out;
  for (int x : v) out.push_back(static_cast<std::size_t>(((x % n) + n) % n));
  std::sort(out.begin(), out.end());
  return out;
}

// max_j |1 - gamma_j(x)| / w_j on Z_n.
std::vector<double> ratios(std::uint64_t n, const std::vector<std::uint64_t>& freqs, const std::vector<double>& widths) {
  std::vector<double> r(n, 0.0);
  for (std::uint64_t x = 0; x < n; ++x) {
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      const std::uint64_t m = (freqs[j] * x) % n;
      const double t = static_cast<double>(std::min(m, n - m)) / static_cast<double>(n);
      r[x] = std::max(r[x], 2 * std::sin(std::numbers::pi * t) / widths[j]);
    }
  }
  return r;
}

// Regularity from the breakpoints of rho -> |B_rho| on [1 - K, 1 + K]: the
// upper bound is tightest where the count jumps, the lower bound just below a
// jump.
bool regular_oracle(std::uint64_t n, const std::vector<std::uint64_t>& freqs, const std::vector<double>& widths,
                    double reg_const) {
  const auto r = ratios(n, freqs, widths);
  const double d = static_cast<double>(freqs.size());
  const double k = 1 / (reg_const * d);
  auto count_le = [&](double rho) {
    return static_cast<double>(std::count_if(r.begin(), r.end(), [&](double v) { return v <= rho * (1 + 1e-12); }));
  };
  auto count_lt = [&](double rho) {
    return static_cast<double>(std::count_if(r.begin(), r.end(), [&](double v) { return v * (1 + 1e-12) < rho; }));
  };
  const double size = count_le(1.0);
  for (double v : r) {
    if (v > 1 && v <= 1 + k && count_le(v) > (1 + reg_const * d * (v - 1)) * size + 1e-9) return false;
    if (v > 1 - k && v <= 1 && count_lt(v) < (1 - reg_const * d * (1 - v)) * size - 1e-9) return false;
  }
  return true;
}

BohrSet cyclic_bohr(std::uint32_t n, std::vector<std::size_t> freqs, std::vector<double> widths) {
  return bohr_build(Group::cyclic(n), std::move(freqs), std::move(widths));
}

}  // namespace

TEST_CASE("Bohr set examples") {
  CHECK(cyclic_bohr(12, {1}, {2.0}).size() == 12);
  const BohrSet b = cyclic_bohr(12, {1}, {1.0});
  CHECK(members(b) == sorted_mod({0, 1, -1, 2, -2}, 12));
  CHECK(cyclic_bohr(12, {0}, {0.1}).size() == 12);
  CHECK(members(dilate(b, 1.0)) == members(b));
  CHECK(members(dilate(b, 0.5)) == std::vector<std::size_t>{0});
}

TEST_CASE("membership against the sine oracle") {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::uint32_t>(rng.between(2, 10000));
    const auto d = static_cast<std::size_t>(rng.between(1, 3));
    std::vector<std::size_t> freqs;
    std::vector<std::uint64_t> f64;
    std::vector<double> widths;
    for (std::size_t j = 0; j < d; ++j) {
      freqs.push_back(static_cast<std::size_t>(rng.below(n)));
      f64.push_back(freqs.back());
      widths.push_back(rng.uniform(0.05, 2.0));
    }
    const BohrSet b = cyclic_bohr(n, freqs, widths);
    CHECK(members(b) == oracle::bohr_members(n, f64, widths));
    const BohrSet h = dilate(b, 0.5);
    CHECK(h.members().subset_of(b.members()));
  }
}

TEST_CASE("Bohr sets on product groups") {
  const Group g = Group::parse("Z5xZ7");
  const std::int64_t fc[] = {1, 2};
  const BohrSet b = bohr_build(g, {g.index_of(fc)}, {0.9});
  for (std::size_t x = 0; x < g.size(); ++x) {
    const Element e = g.element(x);
    const double t = static_cast<double>(e.coords[0]) / 5 + 2.0 * static_cast<double>(e.coords[1]) / 7;
    const double frac = t - std::floor(t);
    const double dist = 2 * std::sin(std::numbers::pi * std::min(frac, 1 - frac));
    CHECK(b.members().contains(x) == (dist <= 0.9 * (1 + 1e-12)));
  }
}

TEST_CASE("regularity decisions against the breakpoint oracle") {
  BohrSet whole = cyclic_bohr(12, {0}, {1.0});
  CHECK(is_regular(whole).regular);
  BohrSet z101 = cyclic_bohr(101, {1}, {0.5});
  CHECK(is_regular(z101).regular == regular_oracle(101, {1}, {0.5}, 100));
  CHECK(z101.regularity().has_value());

  Rng rng(32);
  bool found_irregular = false;
  for (int t = 0; t < 300; ++t) {
    const double w = rng.uniform(0.2, 2.0);
    BohrSet b = cyclic_bohr(12, {1}, {w});
    const bool want = regular_oracle(12, {1}, {w}, 100);
    const Regularity r = is_regular(b);
    CHECK(r.regular == want);
    CHECK((r.margin >= 0) == r.regular);
    found_irregular = found_irregular || !want;
  }
  CHECK(found_irregular);

  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::uint32_t>(rng.between(50, 3000));
    const std::vector<std::uint64_t> f64 = {static_cast<std::uint64_t>(rng.between(1, n - 1)), static_cast<std::uint64_t>(rng.between(1, n - 1))};
    std::vector<double> widths = {rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
    BohrSet b = cyclic_bohr(n, {f64[0], f64[1]}, widths);
    CHECK(is_regular(b, 100).regular == regular_oracle(n, f64, widths, 100));
    CHECK(is_regular(b, 5).regular == regular_oracle(n, f64, widths, 5));
  }
}

TEST_CASE("regular dilates") {
  const BohrSet b = cyclic_bohr(101, {1}, {1.0});
  const RegularDilate rd = regular_dilate(b);
  CHECK(rd.rho >= 0.5);
  CHECK(rd.rho <= 1.0);
  CHECK(regular_oracle(101, {1}, rd.set.widths(), 100));
  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::uint32_t>(rng.between(10, 10000));
    const auto d = static_cast<std::size_t>(rng.between(1, 3));
    std::vector<std::size_t> freqs;
    std::vector<double> widths;
    for (std::size_t j = 0; j < d; ++j) freqs.push_back(static_cast<std::size_t>(rng.between(1, n - 1))), widths.push_back(rng.uniform(0.05, 2));
    const RegularDilate r = regular_dilate(cyclic_bohr(n, freqs, widths));
    CHECK(regularity_of(r.set).regular);
  }
}

TEST_CASE("frequency dilation") {
  const BohrSet b = cyclic_bohr(12, {1}, {1.0});
  CHECK(members(freq_dilate(b, 1)) == members(b));
  CHECK(members(freq_dilate(b, 5)) == sorted_mod({0, 5, 7, 10, 2}, 12));
  CHECK_THROWS_AS(freq_dilate(b, 3), DomainError);
}

TEST_CASE("joins") {
  const BohrSet b = cyclic_bohr(12, {1}, {1.0});
  CHECK(members(join(b, cyclic_bohr(12, {5}, {2.0}))) == members(b));
  const BohrSet j = join(b, cyclic_bohr(12, {5}, {1.5}));
  CHECK(j.widths() == std::vector<double>{1.0, 1.5});
  const BohrSet c = cyclic_bohr(12, {1, 3}, {1.5, 1.2});
  const BohrSet k = join(b, c);
  CHECK(k.rank() == 2);
  CHECK(k.widths()[0] == 1.0);
  CHECK(k.members() == (b.members() & c.members()));
}

TEST_CASE("progressions inside Bohr sets") {
  const BohrSet one = cyclic_bohr(101, {1}, {1e-6});
  CHECK(one.size() == 1);
  const ExtractedAP z = extract_ap(one);
  CHECK(z.run.length == 1);
  CHECK(z.run.start == 0);

  const BohrSet b = cyclic_bohr(101, {1}, {0.5});
  CHECK(members(b) == sorted_mod({-8, -7, -6, -5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8}, 101));
  const ExtractedAP ap = extract_ap(b);
  CHECK(ap.run.length == 17);
  CHECK((ap.run.step == 1 || ap.run.step == 100));
  CHECK(ap.lemma_bound == 2);
  CHECK(ap.run.inside(b.members()));
}
