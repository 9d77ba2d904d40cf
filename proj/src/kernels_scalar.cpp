#include "km/kernels.hpp"

#include <bit>
#include <cmath>

namespace km::kernels {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpy_i64(std::int64_t a, const std::int64_t* x, std::int64_t* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double dot3(const double* w, const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

inline double ipow(double v, unsigned p) {
  double r = 1.0;
  while (p) {
    if (p & 1U) r *= v;
    v *= v;
    p >>= 1U;
  }
  return r;
}

double weighted_abs_pow_sum(const double* w, const double* x, std::size_t n, unsigned p) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * ipow(std::fabs(x[i]), p);
  return s;
}

double abs_pow_sum(const double* x, std::size_t n, unsigned p) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += ipow(std::fabs(x[i]), p);
  return s;
}

std::size_t popcount(const std::uint64_t* a, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i]));
  return c;
}

std::size_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return c;
}

void and_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] &= src[i];
}

void or_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

}  // namespace

const Table& scalar() {
  static const Table t{"scalar",   axpy,     axpy_i64, dot,      dot3,    weighted_abs_pow_sum,
                       abs_pow_sum, popcount, and_popcount, and_into, or_into};
  return t;
}

}  // namespace km::kernels
