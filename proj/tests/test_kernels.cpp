#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "km/kernels.hpp"
#include "km/rng.hpp"

using namespace km;

namespace {

// Tables to compare: scalar always, AVX2 when the CPU has it.
std::vector<const kernels::Table*> tables() {
  std::vector<const kernels::Table*> out{&kernels::scalar()};
  if (const kernels::Table* t = kernels::avx2()) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("active table is one of the known tables") {
  const auto& a = kernels::active();
  CHECK((a.name == kernels::scalar().name || (kernels::avx2() != nullptr && a.name == kernels::avx2()->name)));
}

TEST_CASE("floating kernels agree with the scalar table") {
  Rng rng(21);
  // Lengths straddle the vector width and its tail.
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 1000u}) {
    std::vector<double> x(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform(-2, 2), y[i] = rng.uniform(-2, 2), w[i] = rng.uniform(0, 3);
    const auto& s = kernels::scalar();
    for (const auto* t : tables()) {
      CAPTURE(t->name);
      CAPTURE(n);
      const double scale = 1e-12 * static_cast<double>(n + 1);
      CHECK(std::abs(t->dot(x.data(), y.data(), n) - s.dot(x.data(), y.data(), n)) <= scale * 4);
      CHECK(std::abs(t->dot3(w.data(), x.data(), y.data(), n) - s.dot3(w.data(), x.data(), y.data(), n)) <= scale * 12);
      for (unsigned p : {1u, 2u, 3u, 6u}) {
        const double a = t->abs_pow_sum(x.data(), n, p), b = s.abs_pow_sum(x.data(), n, p);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
        const double c = t->weighted_abs_pow_sum(w.data(), x.data(), n, p);
        const double d = s.weighted_abs_pow_sum(w.data(), x.data(), n, p);
        CHECK(std::abs(c - d) <= 1e-12 * std::max(1.0, std::abs(d)));
      }
      std::vector<double> ya = y, yb = y;
      t->axpy(0.75, x.data(), ya.data(), n);
      s.axpy(0.75, x.data(), yb.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("scalar kernels against direct loops") {
  const auto& s = kernels::scalar();
  const double x[] = {1, -2, 3}, y[] = {4, 5, -6}, w[] = {1, 0.5, 2};
  CHECK(s.dot(x, y, 3) == 4 - 10 - 18);
  CHECK(s.dot3(w, x, y, 3) == 4 - 5 - 36);
  CHECK(s.abs_pow_sum(x, 3, 2) == 14);
  CHECK(s.weighted_abs_pow_sum(w, x, 3, 3) == 1 + 4 + 54);
}

TEST_CASE("integer and bitset kernels are identical across tables") {
  Rng rng(22);
  for (std::size_t n : {0u, 1u, 3u, 4u, 9u, 64u, 257u}) {
    std::vector<std::int64_t> xi(n), yi(n);
    std::vector<std::uint64_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      xi[i] = rng.between(-1000, 1000);
      yi[i] = rng.between(-1000, 1000);
      a[i] = rng.next();
      b[i] = rng.next();
    }
    std::size_t pc = 0, apc = 0;
    for (std::size_t i = 0; i < n; ++i) pc += std::popcount(a[i]), apc += std::popcount(a[i] & b[i]);
    for (const auto* t : tables()) {
      CAPTURE(t->name);
      CHECK(t->popcount(a.data(), n) == pc);
      CHECK(t->and_popcount(a.data(), b.data(), n) == apc);
      std::vector<std::int64_t> y = yi;
      t->axpy_i64(-3, xi.data(), y.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == yi[i] - 3 * xi[i]);
      std::vector<std::uint64_t> d = a, e = a;
      t->and_into(d.data(), b.data(), n);
      t->or_into(e.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(d[i] == (a[i] & b[i]));
        CHECK(e[i] == (a[i] | b[i]));
      }
    }
  }
}
