#pragma once

// Real functions on a finite abelian group under the normalized counting
// measure: E_x f(x) = |G|^{-1} sum_x f(x).
//
// A FuncR always carries double values. Functions built from indicators and
// measures additionally carry an ExactRep (integer numerators over a common
// integer scale); operations propagate it while the integers fit in 64 bits
// and silently drop to the float path otherwise.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "km/group.hpp"

namespace km {

struct ExactRep {
  std::vector<std::int64_t> num;
  std::int64_t scale = 1;  // value[i] = num[i] / scale, scale > 0
};

class FuncR {
 public:
  FuncR() = default;
  explicit FuncR(Group g);  // zero function
  FuncR(Group g, std::vector<double> values);

  // gcd-normalizes; throws DomainError on scale <= 0.
  static FuncR exact(Group g, std::vector<std::int64_t> num, std::int64_t scale);
  static FuncR indicator(const GSet& a);
  static FuncR constant(const Group& g, double c);
  static FuncR constant_exact(const Group& g, std::int64_t num, std::int64_t scale = 1);

  const Group& group() const { return group_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool is_exact() const { return exact_.has_value(); }
  const ExactRep& exact_rep() const { return *exact_; }
  FuncR as_float() const { return FuncR(group_, values_); }

  double mean() const;
  double sup_abs() const;
  GSet support() const;

  FuncR reflect() const;  // x -> f(-x)
  FuncR translate(std::size_t t) const;  // x -> f(x - t)
  FuncR scaled(double c) const;
  FuncR plus_constant(double c) const;
  // Exact when the constant is num/scale and f is exact.
  FuncR plus_constant_exact(std::int64_t num, std::int64_t scale) const;

  friend FuncR operator+(const FuncR& a, const FuncR& b);
  friend FuncR operator-(const FuncR& a, const FuncR& b);
  friend FuncR operator*(const FuncR& a, const FuncR& b);  // pointwise

 private:
  Group group_;
  std::vector<double> values_;
  std::optional<ExactRep> exact_;
};

// Nonnegative FuncR with mean 1 (within 1e-12).
class ProbMeasure {
 public:
  explicit ProbMeasure(FuncR f);
  static ProbMeasure uniform(const Group& g) { return ProbMeasure(FuncR::constant_exact(g, 1)); }

  const FuncR& func() const { return f_; }
  const Group& group() const { return f_.group(); }
  operator const FuncR&() const { return f_; }

 private:
  FuncR f_;
};

// alpha^{-1} 1_A; DomainError when A is empty.
ProbMeasure mu_of_set(const GSet& a);

enum class ConvPath { Auto, Float };

// (f * g)(x) = E_y f(y) g(x - y)
FuncR conv(const FuncR& f, const FuncR& g, ConvPath path = ConvPath::Auto);
// (f o g)(x) = E_y f(y) g(x + y)
FuncR diffconv(const FuncR& f, const FuncR& g, ConvPath path = ConvPath::Auto);

// E_x mu(x) f(x) g(x); uniform mu when omitted.
double inner(const FuncR& f, const FuncR& g);
double inner(const FuncR& f, const FuncR& g, const FuncR& mu);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// (E_x mu(x) |f(x)|^p)^{1/p}; p = kInf gives max |f| over supp mu.
double lp_norm(const FuncR& f, double p);
double lp_norm(const FuncR& f, double p, const FuncR& mu);

}  // namespace km
