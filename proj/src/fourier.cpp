#include "km/fourier.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "km/error.hpp"

namespace km {

std::uint64_t order_lcm(const Group& g) {
  std::uint64_t l = 1;
  for (auto m : g.orders()) l = std::lcm(l, static_cast<std::uint64_t>(m));
  return l;
}

Phase character_phase(const Group& g, std::size_t gamma, std::size_t x) {
  const std::uint64_t den = order_lcm(g);
  const Element c = g.element(gamma);
  const Element e = g.element(x);
  unsigned __int128 num = 0;
  for (std::size_t j = 0; j < g.rank(); ++j) {
    const std::uint64_t m = g.orders()[j];
    num += static_cast<unsigned __int128>((static_cast<std::uint64_t>(c.coords[j]) * e.coords[j]) % m) * (den / m);
  }
  return {static_cast<std::uint64_t>(num % den), den};
}

FuncC::FuncC(Group g, std::vector<cplx> values) : group_(std::move(g)), values_(std::move(values)) {
  if (values_.size() != group_.size()) throw DomainError("spectrum length does not match |G|");
}

namespace {

// In-place naive DFT along every axis: out[k] = sum_t in[t] exp(sign 2 pi i k t / m).
void transform_axes(const Group& g, std::vector<cplx>& v, int sign) {
  std::size_t stride = g.size();
  std::vector<cplx> line;
  std::vector<cplx> out;
  for (std::size_t j = 0; j < g.rank(); ++j) {
    const std::size_t m = g.orders()[j];
    stride /= m;
    if (m == 1) continue;
    std::vector<cplx> w(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
      w[i] = cplx(std::cos(t), sign * std::sin(t));
    }
    line.resize(m);
    out.resize(m);
    const std::size_t block = stride * m;
    for (std::size_t hi = 0; hi < g.size(); hi += block) {
      for (std::size_t lo = 0; lo < stride; ++lo) {
        const std::size_t base = hi + lo;
        for (std::size_t t = 0; t < m; ++t) line[t] = v[base + t * stride];
        for (std::size_t k = 0; k < m; ++k) {
          cplx acc = 0;
          std::size_t idx = 0;
          for (std::size_t t = 0; t < m; ++t) {
            acc += line[t] * w[idx];
            idx += k;
            if (idx >= m) idx -= m;
          }
          out[k] = acc;
        }
        for (std::size_t k = 0; k < m; ++k) v[base + k * stride] = out[k];
      }
    }
  }
}

}  // namespace

FuncC dft(const FuncC& f) {
  std::vector<cplx> v = f.values();
  transform_axes(f.group(), v, -1);
  const double inv = 1.0 / static_cast<double>(f.size());
  for (auto& z : v) z *= inv;
  return FuncC(f.group(), std::move(v));
}

FuncC dft(const FuncR& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  return dft(FuncC(f.group(), std::move(v)));
}

FuncC idft(const FuncC& spectrum) {
  std::vector<cplx> v = spectrum.values();
  transform_axes(spectrum.group(), v, +1);
  return FuncC(spectrum.group(), std::move(v));
}

FuncR idft_real(const FuncC& spectrum) {
  const FuncC c = idft(spectrum);
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c[i].real();
  return FuncR(c.group(), std::move(v));
}

SpectralMin spectral_min(const FuncR& f) {
  const FuncC s = dft(f);
  SpectralMin r{s[0].real(), 0.0};
  for (const auto& z : s.values()) {
    r.min_re = std::min(r.min_re, z.real());
    r.max_abs_im = std::max(r.max_abs_im, std::abs(z.imag()));
  }
  return r;
}

double moment_via_spectrum(const FuncR& f, int k, int cap) {
  if (k < 1) throw DomainError("moment order must be >= 1");
  if (k > cap) throw DomainError("moment order " + std::to_string(k) + " exceeds cap " + std::to_string(cap));
  const Group& g = f.group();
  const FuncC s = dft(f);
  // acc = s (*) s (*) ... (unnormalized sum over the dual group)
  std::vector<cplx> acc = s.values();
  std::vector<cplx> next(g.size());
  for (int step = 1; step < k; ++step) {
    std::fill(next.begin(), next.end(), cplx(0));
    for (std::size_t a = 0; a < g.size(); ++a) {
      if (acc[a] == cplx(0)) continue;
      for (std::size_t b = 0; b < g.size(); ++b) next[g.add(a, b)] += acc[a] * s[b];
    }
    acc.swap(next);
  }
  return acc[0].real();
}

}  // namespace km
