#include <doctest.h>

#include <cmath>
#include <numbers>

#include "km/error.hpp"
#include "km/fourier.hpp"
#include "km/rng.hpp"
#include "oracles.hpp"

using namespace km;

namespace {

FuncR random_func(Rng& rng, const Group& g) {
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.uniform(-1, 1);
  return FuncR(g, v);
}

}  // namespace

TEST_CASE("transform examples") {
  const Group z4 = Group::cyclic(4);
  const FuncC one = dft(FuncR::constant_exact(z4, 1));
  CHECK(std::abs(one[0] - cplx(1, 0)) < 1e-15);
  for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(one[i]) < 1e-15);
  const FuncC delta = dft(FuncR::indicator(oracle::cyclic_set(4, {0})));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(delta[i] - cplx(0.25, 0)) < 1e-15);
  const FuncC m = dft(mu_of_set(oracle::cyclic_set(5, {0, 1})).func());
  const cplx want = (1.0 + std::polar(1.0, -2 * std::numbers::pi / 5)) / 2.0;
  CHECK(std::abs(m[1] - want) < 1e-14);
  CHECK(std::abs(m[1]) == doctest::Approx(std::cos(std::numbers::pi / 5)));
}

TEST_CASE("transform against the direct character sum") {
  Rng rng(11);
  for (std::uint32_t n : {1u, 2u, 3u, 12u, 17u, 64u, 100u}) {
    const FuncR f = random_func(rng, Group::cyclic(n));
    const auto want = oracle::dft(f.values());
    const FuncC got = dft(f);
    for (std::size_t c = 0; c < n; ++c) CHECK(std::abs(got[c] - want[c]) < 1e-12);
  }
}

TEST_CASE("transform on a product group uses coordinate characters") {
  const Group g = Group::parse("Z3xZ4");
  Rng rng(12);
  const FuncR f = random_func(rng, g);
  const FuncC got = dft(f);
  for (std::size_t c = 0; c < g.size(); ++c) {
    const Element ce = g.element(c);
    cplx acc = 0;
    for (std::size_t x = 0; x < g.size(); ++x) {
      const Element xe = g.element(x);
      const double t = static_cast<double>(ce.coords[0] * xe.coords[0]) / 3 + static_cast<double>(ce.coords[1] * xe.coords[1]) / 4;
      acc += f[x] * std::polar(1.0, -2 * std::numbers::pi * t);
    }
    CHECK(std::abs(got[c] - acc / 12.0) < 1e-12);
    const Phase ph = character_phase(g, c, 5);
    const Element x5 = g.element(5);
    const std::uint64_t num = (ce.coords[0] * x5.coords[0] * 4 + ce.coords[1] * x5.coords[1] * 3) % 12;
    CHECK(ph.den == 12);
    CHECK(ph.num == num);
  }
  CHECK(order_lcm(g) == 12);
}

TEST_CASE("inverse transform round trip") {
  Rng rng(13);
  const Group g = Group::parse("Z5xZ6");
  const FuncR f = random_func(rng, g);
  const FuncR back = idft_real(dft(f));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-12));
}

TEST_CASE("spectral minimum") {
  const Group z2 = Group::cyclic(2);
  const FuncR f = FuncR::indicator(oracle::cyclic_set(2, {1})) - FuncR::indicator(oracle::cyclic_set(2, {0}));
  CHECK(spectral_min(f).min_re == doctest::Approx(-1.0));
  CHECK(spectral_min(FuncR(z2)).min_re == 0.0);
  for (std::uint64_t mask = 1; mask < 128; ++mask) {
    const ProbMeasure m = mu_of_set(oracle::cyclic_set(7, oracle::mask_elems(mask, 7)));
    CHECK(spectral_min(diffconv(m, m).plus_constant_exact(-1, 1)).min_re >= -1e-10);
  }
}

TEST_CASE("moments through the dual side") {
  const Group z5 = Group::cyclic(5);
  for (int k = 1; k <= kMomentCap; ++k) CHECK(moment_via_spectrum(FuncR::constant_exact(z5, 1), k) == doctest::Approx(1.0));
  const ProbMeasure m = mu_of_set(oracle::cyclic_set(5, {0, 1}));
  const FuncR f = diffconv(m, m).plus_constant_exact(-1, 1);
  double direct = 0;
  for (auto v : f.values()) direct += v * v * v;
  CHECK(moment_via_spectrum(f, 3) == doctest::Approx(direct / 5).epsilon(1e-12));
  for (int k : {1, 3, 5, 7}) CHECK(moment_via_spectrum(f, k) >= -1e-10);
  CHECK_THROWS_AS(moment_via_spectrum(f, 0), DomainError);
  CHECK_THROWS_AS(moment_via_spectrum(f, kMomentCap + 1), DomainError);
}

TEST_CASE("convolution theorem and Parseval") {
  Rng rng(14);
  for (const char* spec : {"Z7", "Z2^5", "Z9xZ10", "Z512"}) {
    const Group g = Group::parse(spec);
    const FuncR f = random_func(rng, g), h = random_func(rng, g);
    const FuncC ff = dft(f), fh = dft(h), fc = dft(conv(f, h));
    double l2 = 0, spec_sum = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(fc[i] - ff[i] * fh[i]) < 1e-9);
      l2 += f[i] * f[i];
      spec_sum += std::norm(ff[i]);
    }
    CHECK(l2 / static_cast<double>(g.size()) == doctest::Approx(spec_sum).epsilon(1e-9));
  }
}
