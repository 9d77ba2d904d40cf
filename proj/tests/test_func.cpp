#include <doctest.h>

#include <cmath>

#include "km/error.hpp"
#include "km/func.hpp"
#include "km/rng.hpp"
#include "oracles.hpp"

using namespace km;

namespace {

void check_values(const FuncR& f, const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(f.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(f[i] == doctest::Approx(want[i]).epsilon(tol));
}

FuncR random_func(Rng& rng, const Group& g) {
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.uniform(-1, 1);
  return FuncR(g, v);
}

}  // namespace

TEST_CASE("normalized indicators") {
  const Group z5 = Group::cyclic(5);
  check_values(mu_of_set(GSet::full(z5)).func(), {1, 1, 1, 1, 1});
  check_values(mu_of_set(oracle::cyclic_set(5, {0, 1})).func(), {2.5, 2.5, 0, 0, 0});
  CHECK_THROWS_AS(mu_of_set(GSet(z5)), DomainError);
  CHECK(mu_of_set(oracle::cyclic_set(5, {0, 1})).func().is_exact());
}

TEST_CASE("convolution examples") {
  const Group z5 = Group::cyclic(5);
  const FuncR one = FuncR::constant_exact(z5, 1);
  check_values(conv(one, one), {1, 1, 1, 1, 1});
  const ProbMeasure m = mu_of_set(oracle::cyclic_set(5, {0, 1}));
  check_values(conv(m, m), {1.25, 2.5, 1.25, 0, 0});
  check_values(diffconv(m, m), {2.5, 1.25, 0, 0, 1.25});
  const Group z4 = Group::cyclic(4);
  check_values(conv(FuncR::indicator(oracle::cyclic_set(4, {0})), FuncR::indicator(oracle::cyclic_set(4, {1}))),
               {0, 0.25, 0, 0});
  const FuncR f = FuncR::indicator(oracle::cyclic_set(4, {0, 2}));
  CHECK(diffconv(f, f)[0] == doctest::Approx(0.5));
  const Group z7 = Group::cyclic(7);
  check_values(diffconv(FuncR::indicator(oracle::cyclic_set(7, {1})), FuncR::indicator(oracle::cyclic_set(7, {3}))),
               {0, 0, 1.0 / 7, 0, 0, 0, 0});
}

TEST_CASE("conv and diffconv against the direct sums") {
  Rng rng(3);
  for (std::uint32_t n : {1u, 2u, 7u, 16u, 33u, 64u}) {
    const Group g = Group::cyclic(n);
    const FuncR f = random_func(rng, g), h = random_func(rng, g);
    check_values(conv(f, h), oracle::conv(f.values(), h.values()), 1e-10);
    check_values(diffconv(f, h), oracle::diffconv(f.values(), h.values()), 1e-10);
  }
}

TEST_CASE("conv on a product group against the coordinate sum") {
  const Group g = Group::parse("Z3xZ4");
  Rng rng(4);
  const FuncR f = random_func(rng, g), h = random_func(rng, g);
  const FuncR c = conv(f, h), d = diffconv(f, h);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double sc = 0, sd = 0;
    for (std::size_t y = 0; y < g.size(); ++y) {
      sc += f[y] * h[g.sub(x, y)];
      sd += f[y] * h[g.add(x, y)];
    }
    CHECK(c[x] == doctest::Approx(sc / 12).epsilon(1e-12));
    CHECK(d[x] == doctest::Approx(sd / 12).epsilon(1e-12));
  }
}

TEST_CASE("exact and float paths agree cell by cell") {
  Rng rng(8);
  for (std::uint32_t n : {5u, 12u, 100u, 512u}) {
    const Group g = Group::cyclic(n);
    std::vector<std::int64_t> a(n), b(n);
    for (auto& x : a) x = rng.between(-5, 5);
    for (auto& x : b) x = rng.between(-5, 5);
    const FuncR f = FuncR::exact(g, a, 3), h = FuncR::exact(g, b, 7);
    const FuncR e = conv(f, h), fl = conv(f, h, ConvPath::Float);
    CHECK(e.is_exact());
    CHECK_FALSE(fl.is_exact());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(e[i] - fl[i]) <= 1e-12 * std::max(1.0, std::abs(e[i])));
  }
}

TEST_CASE("adjoint pairing identity") {
  Rng rng(6);
  const Group g = Group::parse("Z2xZ6");
  const FuncR f = random_func(rng, g), a = random_func(rng, g), b = random_func(rng, g);
  CHECK(inner(f, conv(a, b)) == doctest::Approx(inner(diffconv(b, f), a)).epsilon(1e-12));
}

TEST_CASE("inner products") {
  const Group z5 = Group::cyclic(5);
  CHECK(inner(conv(FuncR::constant_exact(z5, 1), FuncR::constant_exact(z5, 1)), FuncR::constant_exact(z5, 1)) == 1.0);
  const GSet a = oracle::cyclic_set(5, {0, 1});
  const ProbMeasure m = mu_of_set(a);
  CHECK(inner(conv(m, m), mu_of_set(dilate_set(a, 2))) == doctest::Approx(1.25));
  CHECK(inner(FuncR::indicator(oracle::cyclic_set(7, {1})), FuncR::indicator(oracle::cyclic_set(7, {2}))) == 0.0);
}

TEST_CASE("Lp norms") {
  const Group z5 = Group::cyclic(5);
  CHECK(lp_norm(mu_of_set(oracle::cyclic_set(5, {0, 1})), kInf) == 2.5);
  for (double p : {1.0, 2.0, 3.5, 8.0}) CHECK(lp_norm(FuncR::constant_exact(z5, 1), p) == doctest::Approx(1.0));
  const ProbMeasure m = mu_of_set(oracle::cyclic_set(5, {0}));
  CHECK(lp_norm(conv(m, m).plus_constant_exact(-1, 1), 2) == doctest::Approx(2.0));
  // Weighted: only the support of mu counts.
  const FuncR w = mu_of_set(oracle::cyclic_set(5, {1, 2})).func();
  const FuncR f(z5, {9, 1, 3, 0, 0});
  CHECK(lp_norm(f, 2, w) == doctest::Approx(std::sqrt((2.5 * 1 + 2.5 * 9) / 5)));
  CHECK(lp_norm(f, kInf, w) == 3.0);
  CHECK_THROWS_AS(lp_norm(f, 0.5), DomainError);
}

TEST_CASE("exact representation survives arithmetic") {
  const Group z6 = Group::cyclic(6);
  const FuncR f = FuncR::exact(z6, {1, 2, 3, 4, 5, 6}, 4);
  CHECK(f.is_exact());
  CHECK(f.exact_rep().scale == 4);
  const FuncR g = f.plus_constant_exact(-1, 2);
  CHECK(g.is_exact());
  CHECK(g[0] == doctest::Approx(-0.25));
  CHECK((f - f).sup_abs() == 0.0);
  CHECK(f.reflect()[1] == f[5]);
  CHECK(f.translate(2)[3] == f[1]);
  CHECK_THROWS_AS(FuncR::exact(z6, {1, 1, 1, 1, 1, 1}, 0), DomainError);
  CHECK_THROWS_AS(f + FuncR(Group::cyclic(5)), GroupMismatch);
}

TEST_CASE("probability measures") {
  CHECK_THROWS(ProbMeasure(FuncR(Group::cyclic(3), {3, 0, 1})));
  CHECK_THROWS(ProbMeasure(FuncR(Group::cyclic(3), {2, 2, -1})));
  CHECK(ProbMeasure::uniform(Group::cyclic(4)).func().mean() == 1.0);
}
