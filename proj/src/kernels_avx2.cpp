#include "km/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <bit>
#include <cmath>

#define KM_AVX2 __attribute__((target("avx2,fma,popcnt")))

namespace km::kernels {
namespace {

KM_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

KM_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// 64-bit multiply from 32x32->64 partial products; wraps like the scalar path.
KM_AVX2 inline __m256i mul_i64(__m256i a, __m256i b) {
  const __m256i a_hi = _mm256_srli_epi64(a, 32);
  const __m256i b_hi = _mm256_srli_epi64(b, 32);
  const __m256i lo = _mm256_mul_epu32(a, b);
  const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(a_hi, b), _mm256_mul_epu32(a, b_hi));
  return _mm256_add_epi64(lo, _mm256_slli_epi64(cross, 32));
}

KM_AVX2 void axpy_i64(std::int64_t a, const std::int64_t* x, std::int64_t* y, std::size_t n) {
  const __m256i va = _mm256_set1_epi64x(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i vx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i));
    __m256i vy = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y + i));
    vy = _mm256_add_epi64(vy, mul_i64(va, vx));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(y + i), vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

KM_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

KM_AVX2 double dot3(const double* w, const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
    acc = _mm256_fmadd_pd(wx, _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

KM_AVX2 inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

KM_AVX2 inline __m256d vipow(__m256d v, unsigned p) {
  __m256d r = _mm256_set1_pd(1.0);
  while (p) {
    if (p & 1U) r = _mm256_mul_pd(r, v);
    v = _mm256_mul_pd(v, v);
    p >>= 1U;
  }
  return r;
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

KM_AVX2 double weighted_abs_pow_sum(const double* w, const double* x, std::size_t n, unsigned p) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = vipow(vabs(_mm256_loadu_pd(x + i)), p);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * ipow(std::fabs(x[i]), p);
  return s;
}

KM_AVX2 double abs_pow_sum(const double* x, std::size_t n, unsigned p) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, vipow(vabs(_mm256_loadu_pd(x + i)), p));
  double s = hsum(acc);
  for (; i < n; ++i) s += ipow(std::fabs(x[i]), p);
  return s;
}

// Nibble-table popcount (Mula); counts are accumulated per 64-bit lane.
KM_AVX2 inline __m256i popcnt256(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2,
                                       1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
  const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

KM_AVX2 inline std::size_t hsum_u64(__m256i v) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return static_cast<std::size_t>(lanes[0] + lanes[1] + lanes[2] + lanes[3]);
}

KM_AVX2 std::size_t popcount(const std::uint64_t* a, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_epi64(acc, popcnt256(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i))));
  }
  std::size_t c = hsum_u64(acc);
  for (; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i]));
  return c;
}

KM_AVX2 std::size_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    acc = _mm256_add_epi64(acc, popcnt256(_mm256_and_si256(va, vb)));
  }
  std::size_t c = hsum_u64(acc);
  for (; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return c;
}

KM_AVX2 void and_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    auto* d = reinterpret_cast<__m256i*>(dst + i);
    const auto s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(d, _mm256_and_si256(_mm256_loadu_si256(d), s));
  }
  for (; i < n; ++i) dst[i] &= src[i];
}

KM_AVX2 void or_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    auto* d = reinterpret_cast<__m256i*>(dst + i);
    const auto s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(d, _mm256_or_si256(_mm256_loadu_si256(d), s));
  }
  for (; i < n; ++i) dst[i] |= src[i];
}

}  // namespace

const Table* avx2() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
                         __builtin_cpu_supports("popcnt");
  static const Table t{"avx2",   axpy,     axpy_i64, dot,      dot3,    weighted_abs_pow_sum,
                       abs_pow_sum, popcount, and_popcount, and_into, or_into};
  return ok ? &t : nullptr;
}

}  // namespace km::kernels

#else

namespace km::kernels {
// NEON and other targets use the scalar table.
const Table* avx2() { return nullptr; }
}  // namespace km::kernels

#endif
