#pragma once

// Brute-force reference computations shared by the unit tests. Each works on
// plain index arithmetic over a cyclic group or on explicit coordinate
// tuples and never calls the routine it checks.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "km/group.hpp"

namespace oracle {

inline std::vector<int> mask_elems(std::uint64_t mask, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if ((mask >> i) & 1U) out.push_back(i);
  }
  return out;
}

inline km::GSet cyclic_set(std::uint32_t n, const std::vector<int>& elems) {
  km::GSet s(km::Group::cyclic(n));
  for (int e : elems) s.insert(static_cast<std::size_t>(((e % static_cast<int>(n)) + static_cast<int>(n)) % static_cast<int>(n)));
  return s;
}

// (f * g)(x) = (1/n) sum_y f(y) g(x - y) on Z_n.
inline std::vector<double> conv(const std::vector<double>& f, const std::vector<double>& g) {
  const std::size_t n = f.size();
  std::vector<double> h(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) h[x] += f[y] * g[(x + n - y) % n];
    h[x] /= static_cast<double>(n);
  }
  return h;
}

// (f o g)(x) = (1/n) sum_y f(y) g(x + y) on Z_n.
inline std::vector<double> diffconv(const std::vector<double>& f, const std::vector<double>& g) {
  const std::size_t n = f.size();
  std::vector<double> h(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) h[x] += f[y] * g[(x + y) % n];
    h[x] /= static_cast<double>(n);
  }
  return h;
}

// f^(c) = (1/n) sum_x f(x) exp(-2 pi i c x / n) on Z_n.
inline std::vector<std::complex<double>> dft(const std::vector<double>& f) {
  const std::size_t n = f.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::complex<double> acc = 0;
    for (std::size_t x = 0; x < n; ++x) {
      acc += f[x] * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>((c * x) % n) / static_cast<double>(n));
    }
    out[c] = acc / static_cast<double>(n);
  }
  return out;
}

// Ordered pairs (x, d) with x, x + d, x + 2d in A, on Z_n.
inline std::uint64_t count_3aps(std::uint32_t n, const std::vector<int>& elems) {
  std::vector<bool> in(n, false);
  for (int e : elems) in[static_cast<std::size_t>(e)] = true;
  std::uint64_t c = 0;
  for (std::uint32_t x = 0; x < n; ++x) {
    for (std::uint32_t d = 0; d < n; ++d) c += (in[x] && in[(x + d) % n] && in[(x + 2 * d) % n]) ? 1 : 0;
  }
  return c;
}

// Members of the cyclic Bohr set {x : 2 sin(pi ||k x / n||) <= w (1 + 1e-12)}.
inline std::vector<std::size_t> bohr_members(std::uint64_t n, const std::vector<std::uint64_t>& freqs,
                                             const std::vector<double>& widths) {
  std::vector<std::size_t> out;
  for (std::uint64_t x = 0; x < n; ++x) {
    bool in = true;
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      const std::uint64_t m = (freqs[j] * x) % n;
      const double t = static_cast<double>(std::min(m, n - m)) / static_cast<double>(n);
      if (2 * std::sin(std::numbers::pi * t) > std::min(2.0, widths[j]) * (1 + 1e-12)) in = false;
    }
    if (in) out.push_back(x);
  }
  return out;
}

}  // namespace oracle
