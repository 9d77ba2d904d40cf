#pragma once

// Characters and the Fourier transform f^(gamma) = E_x f(x) gamma(-x).
//
// The dual group is indexed by the same coordinate tuples as G: the tuple
// (c_1, ..., c_r) names gamma(x) = exp(2 pi i sum_j c_j x_j / m_j).

#include <complex>
#include <cstdint>
#include <vector>

#include "km/func.hpp"

namespace km {

using cplx = std::complex<double>;

// Exact phase of gamma(x) as num / den of a full turn, den = lcm(m_j).
struct Phase {
  std::uint64_t num;
  std::uint64_t den;
};
Phase character_phase(const Group& g, std::size_t gamma, std::size_t x);
std::uint64_t order_lcm(const Group& g);

class FuncC {
 public:
  FuncC() = default;
  FuncC(Group g, std::vector<cplx> values);

  const Group& group() const { return group_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<cplx>& values() const { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

 private:
  Group group_;
  std::vector<cplx> values_;
};

FuncC dft(const FuncR& f);
FuncC dft(const FuncC& f);
// Inverse: f(x) = sum_gamma F(gamma) gamma(x).
FuncC idft(const FuncC& spectrum);
FuncR idft_real(const FuncC& spectrum);

struct SpectralMin {
  double min_re;
  double max_abs_im;
};
SpectralMin spectral_min(const FuncR& f);

inline constexpr int kMomentCap = 8;

// E_x f(x)^k computed as the k-fold dual-side convolution of f^ at the
// trivial character. DomainError when k < 1 or k > cap.
double moment_via_spectrum(const FuncR& f, int k, int cap = kMomentCap);

}  // namespace km
