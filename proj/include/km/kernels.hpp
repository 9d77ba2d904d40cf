#pragma once

// Data-parallel inner loops shared by the function algebra, the bitset set
// algebra and the Bohr membership scans.
//
// Every kernel has a scalar reference implementation. An AVX2 variant is
// compiled with a per-function target attribute and chosen at runtime when
// the CPU supports it; KM_SIMD=scalar in the environment forces the scalar
// table. The two tables are equivalence-tested in tests/test_kernels.cpp.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace km::kernels {

struct Table {
  std::string_view name;

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] += a * x[i] on 64-bit integers; caller guarantees no overflow.
  void (*axpy_i64)(std::int64_t a, const std::int64_t* x, std::int64_t* y, std::size_t n);
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i w[i] * x[i] * y[i]
  double (*dot3)(const double* w, const double* x, const double* y, std::size_t n);
  // sum_i w[i] * |x[i]|^p for integer p >= 1
  double (*weighted_abs_pow_sum)(const double* w, const double* x, std::size_t n, unsigned p);
  // sum_i |x[i]|^p for integer p >= 1
  double (*abs_pow_sum)(const double* x, std::size_t n, unsigned p);

  std::size_t (*popcount)(const std::uint64_t* a, std::size_t n);
  std::size_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
  void (*and_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
  void (*or_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
};

const Table& scalar();

// nullptr when the binary or the CPU lacks AVX2.
const Table* avx2();

// The table selected for this process.
const Table& active();

}  // namespace km::kernels
