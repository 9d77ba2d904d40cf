#include "km/func.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "km/error.hpp"
#include "km/kernels.hpp"

namespace km {

namespace {

using i128 = __int128;
constexpr i128 kI64Max = std::numeric_limits<std::int64_t>::max();

std::vector<double> to_doubles(const std::vector<std::int64_t>& num, std::int64_t scale) {
  std::vector<double> v(num.size());
  const long double s = static_cast<long double>(scale);
  for (std::size_t i = 0; i < num.size(); ++i) v[i] = static_cast<double>(num[i] / s);
  return v;
}

std::int64_t max_abs(const std::vector<std::int64_t>& v) {
  std::int64_t m = 0;
  for (auto x : v) m = std::max(m, x < 0 ? -x : x);
  return m;
}

void check_same(const Group& a, const Group& b) {
  if (!(a == b)) throw GroupMismatch();
}

// Shape of the contiguous last factor and the group of the remaining ones.
struct Split {
  std::size_t m;
  std::size_t prefixes;
  std::optional<Group> head;

  explicit Split(const Group& g) : m(g.orders().back()), prefixes(g.size() / g.orders().back()) {
    if (g.rank() > 1) {
      head.emplace(std::vector<std::uint32_t>(g.orders().begin(), g.orders().end() - 1));
    }
  }
  std::size_t add(std::size_t a, std::size_t b) const { return head ? head->add(a, b) : 0; }
};

// out[x] += sum_y f[y] g[x - y] (unnormalized), one segment-axpy per
// (y, prefix) pair; the last factor wraps in two pieces.
template <class T, class Axpy>
void accumulate_conv(const Group& grp, const std::vector<T>& f, const std::vector<T>& g, std::vector<T>& out,
                     Axpy axpy) {
  const Split sp(grp);
  const std::size_t m = sp.m;
  for (std::size_t y = 0; y < f.size(); ++y) {
    const T a = f[y];
    if (a == T{0}) continue;
    const std::size_t yp = y / m;
    const std::size_t yl = y % m;
    for (std::size_t p = 0; p < sp.prefixes; ++p) {
      const std::size_t dp = sp.add(yp, p);
      const T* src = g.data() + p * m;
      T* dst = out.data() + dp * m;
      axpy(a, src, dst + yl, m - yl);
      if (yl > 0) axpy(a, src + (m - yl), dst, yl);
    }
  }
}

}  // namespace

FuncR::FuncR(Group g) : group_(std::move(g)), values_(group_.size(), 0.0) {
  exact_ = ExactRep{std::vector<std::int64_t>(group_.size(), 0), 1};
}

FuncR::FuncR(Group g, std::vector<double> values) : group_(std::move(g)), values_(std::move(values)) {
  if (values_.size() != group_.size()) throw DomainError("function length does not match |G|");
}

FuncR FuncR::exact(Group g, std::vector<std::int64_t> num, std::int64_t scale) {
  if (scale <= 0) throw DomainError("exact scale must be positive");
  if (num.size() != g.size()) throw DomainError("function length does not match |G|");
  std::int64_t d = scale;
  for (auto x : num) {
    d = std::gcd(d, x < 0 ? -x : x);
    if (d == 1) break;
  }
  if (d > 1) {
    for (auto& x : num) x /= d;
    scale /= d;
  }
  FuncR f;
  f.values_ = to_doubles(num, scale);
  f.group_ = std::move(g);
  f.exact_ = ExactRep{std::move(num), scale};
  return f;
}

FuncR FuncR::indicator(const GSet& a) {
  std::vector<std::int64_t> num(a.group().size(), 0);
  for (auto i : a.indices()) num[i] = 1;
  return exact(a.group(), std::move(num), 1);
}

FuncR FuncR::constant(const Group& g, double c) { return FuncR(g, std::vector<double>(g.size(), c)); }

FuncR FuncR::constant_exact(const Group& g, std::int64_t num, std::int64_t scale) {
  return exact(g, std::vector<std::int64_t>(g.size(), num), scale);
}

double FuncR::mean() const {
  if (exact_) {
    i128 s = 0;
    for (auto x : exact_->num) s += x;
    return static_cast<double>(static_cast<long double>(s) /
                               (static_cast<long double>(exact_->scale) * static_cast<long double>(size())));
  }
  double s = 0;
  for (auto v : values_) s += v;
  return s / static_cast<double>(size());
}

double FuncR::sup_abs() const {
  double m = 0;
  for (auto v : values_) m = std::max(m, std::abs(v));
  return m;
}

GSet FuncR::support() const {
  GSet s(group_);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != 0.0) s.insert(i);
  }
  return s;
}

FuncR FuncR::reflect() const {
  if (exact_) {
    std::vector<std::int64_t> num(size());
    for (std::size_t i = 0; i < size(); ++i) num[group_.neg(i)] = exact_->num[i];
    return exact(group_, std::move(num), exact_->scale);
  }
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[group_.neg(i)] = values_[i];
  return FuncR(group_, std::move(v));
}

FuncR FuncR::translate(std::size_t t) const {
  if (exact_) {
    std::vector<std::int64_t> num(size());
    for (std::size_t i = 0; i < size(); ++i) num[group_.add(i, t)] = exact_->num[i];
    return exact(group_, std::move(num), exact_->scale);
  }
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) v[group_.add(i, t)] = values_[i];
  return FuncR(group_, std::move(v));
}

FuncR FuncR::scaled(double c) const {
  std::vector<double> v(values_);
  for (auto& x : v) x *= c;
  return FuncR(group_, std::move(v));
}

FuncR FuncR::plus_constant(double c) const {
  std::vector<double> v(values_);
  for (auto& x : v) x += c;
  return FuncR(group_, std::move(v));
}

FuncR FuncR::plus_constant_exact(std::int64_t num, std::int64_t scale) const {
  if (!exact_ || scale <= 0) return plus_constant(static_cast<double>(num) / static_cast<double>(scale));
  const i128 s = static_cast<i128>(exact_->scale) * scale;
  const i128 c = static_cast<i128>(num) * exact_->scale;
  const i128 bound = static_cast<i128>(max_abs(exact_->num)) * scale + (c < 0 ? -c : c);
  if (s > kI64Max || bound > kI64Max) return plus_constant(static_cast<double>(num) / static_cast<double>(scale));
  std::vector<std::int64_t> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out[i] = static_cast<std::int64_t>(static_cast<i128>(exact_->num[i]) * scale + c);
  }
  return exact(group_, std::move(out), static_cast<std::int64_t>(s));
}

namespace {

// Combines two exact functions over the common scale sa*sb when it fits.
template <class Op>
std::optional<FuncR> combine_exact(const FuncR& a, const FuncR& b, Op op) {
  if (!a.is_exact() || !b.is_exact()) return std::nullopt;
  const auto& ea = a.exact_rep();
  const auto& eb = b.exact_rep();
  const std::int64_t g = std::gcd(ea.scale, eb.scale);
  const i128 s = static_cast<i128>(ea.scale / g) * eb.scale;
  if (s > kI64Max) return std::nullopt;
  const std::int64_t fa = eb.scale / g;
  const std::int64_t fb = ea.scale / g;
  const i128 bound = static_cast<i128>(max_abs(ea.num)) * fa + static_cast<i128>(max_abs(eb.num)) * fb;
  if (bound > kI64Max) return std::nullopt;
  std::vector<std::int64_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(ea.num[i] * fa, eb.num[i] * fb);
  return FuncR::exact(a.group(), std::move(out), static_cast<std::int64_t>(s));
}

}  // namespace

FuncR operator+(const FuncR& a, const FuncR& b) {
  check_same(a.group(), b.group());
  if (auto r = combine_exact(a, b, [](std::int64_t x, std::int64_t y) { return x + y; })) return *r;
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  return FuncR(a.group(), std::move(v));
}

FuncR operator-(const FuncR& a, const FuncR& b) {
  check_same(a.group(), b.group());
  if (auto r = combine_exact(a, b, [](std::int64_t x, std::int64_t y) { return x - y; })) return *r;
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return FuncR(a.group(), std::move(v));
}

FuncR operator*(const FuncR& a, const FuncR& b) {
  check_same(a.group(), b.group());
  if (a.is_exact() && b.is_exact()) {
    const auto& ea = a.exact_rep();
    const auto& eb = b.exact_rep();
    const i128 s = static_cast<i128>(ea.scale) * eb.scale;
    const i128 bound = static_cast<i128>(max_abs(ea.num)) * max_abs(eb.num);
    if (s <= kI64Max && bound <= kI64Max) {
      std::vector<std::int64_t> out(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = ea.num[i] * eb.num[i];
      return FuncR::exact(a.group(), std::move(out), static_cast<std::int64_t>(s));
    }
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return FuncR(a.group(), std::move(v));
}

ProbMeasure::ProbMeasure(FuncR f) : f_(std::move(f)) {
  for (auto v : f_.values()) {
    if (v < 0) throw DomainError("probability measure has a negative value");
  }
  if (std::abs(f_.mean() - 1.0) > 1e-12) throw DomainError("probability measure does not have mean 1");
}

ProbMeasure mu_of_set(const GSet& a) {
  if (a.empty()) throw DomainError("mu_A is undefined for empty A");
  std::vector<std::int64_t> num(a.group().size(), 0);
  const auto n = static_cast<std::int64_t>(a.group().size());
  for (auto i : a.indices()) num[i] = n;
  return ProbMeasure(FuncR::exact(a.group(), std::move(num), static_cast<std::int64_t>(a.card())));
}

FuncR conv(const FuncR& f, const FuncR& g, ConvPath path) {
  check_same(f.group(), g.group());
  const Group& grp = f.group();
  const auto& k = kernels::active();
  if (path == ConvPath::Auto && f.is_exact() && g.is_exact()) {
    const auto& ef = f.exact_rep();
    const auto& eg = g.exact_rep();
    std::size_t nnz = 0;
    for (auto x : ef.num) nnz += x != 0;
    const i128 bound = static_cast<i128>(max_abs(ef.num)) * max_abs(eg.num) * static_cast<i128>(nnz);
    const i128 scale = static_cast<i128>(ef.scale) * eg.scale * static_cast<i128>(grp.size());
    if (bound <= (i128{1} << 62) && scale <= kI64Max) {
      std::vector<std::int64_t> out(grp.size(), 0);
      accumulate_conv(grp, ef.num, eg.num, out,
                      [&](std::int64_t a, const std::int64_t* x, std::int64_t* y, std::size_t n) {
                        k.axpy_i64(a, x, y, n);
                      });
      return FuncR::exact(grp, std::move(out), static_cast<std::int64_t>(scale));
    }
  }
  std::vector<double> out(grp.size(), 0.0);
  accumulate_conv(grp, f.values(), g.values(), out,
                  [&](double a, const double* x, double* y, std::size_t n) { k.axpy(a, x, y, n); });
  const double inv = 1.0 / static_cast<double>(grp.size());
  for (auto& v : out) v *= inv;
  return FuncR(grp, std::move(out));
}

FuncR diffconv(const FuncR& f, const FuncR& g, ConvPath path) { return conv(f.reflect(), g, path); }

double inner(const FuncR& f, const FuncR& g) {
  check_same(f.group(), g.group());
  if (f.is_exact() && g.is_exact()) {
    const auto& ef = f.exact_rep();
    const auto& eg = g.exact_rep();
    const i128 s = static_cast<i128>(ef.scale) * eg.scale;
    const long double bound = static_cast<long double>(max_abs(ef.num)) * max_abs(eg.num) * f.size();
    if (bound < 1e37L) {
      i128 acc = 0;
      for (std::size_t i = 0; i < f.size(); ++i) acc += static_cast<i128>(ef.num[i]) * eg.num[i];
      return static_cast<double>(static_cast<long double>(acc) /
                                 (static_cast<long double>(s) * static_cast<long double>(f.size())));
    }
  }
  return kernels::active().dot(f.values().data(), g.values().data(), f.size()) / static_cast<double>(f.size());
}

double inner(const FuncR& f, const FuncR& g, const FuncR& mu) {
  check_same(f.group(), g.group());
  check_same(f.group(), mu.group());
  if (f.is_exact() && g.is_exact() && mu.is_exact()) {
    const auto& ef = f.exact_rep();
    const auto& eg = g.exact_rep();
    const auto& em = mu.exact_rep();
    const long double bound =
        static_cast<long double>(max_abs(ef.num)) * max_abs(eg.num) * max_abs(em.num) * f.size();
    if (bound < 1e37L) {
      i128 acc = 0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (em.num[i] != 0) acc += static_cast<i128>(ef.num[i]) * eg.num[i] * em.num[i];
      }
      const long double s = static_cast<long double>(ef.scale) * eg.scale * em.scale * f.size();
      return static_cast<double>(static_cast<long double>(acc) / s);
    }
  }
  return kernels::active().dot3(mu.values().data(), f.values().data(), g.values().data(), f.size()) /
         static_cast<double>(f.size());
}

namespace {

double lp_impl(const FuncR& f, double p, const FuncR* mu) {
  if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1");
  const std::size_t n = f.size();
  double top = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu == nullptr || (*mu)[i] != 0.0) top = std::max(top, std::abs(f[i]));
  }
  if (std::isinf(p) || top == 0.0) return top;
  // Normalize by the max so large p cannot overflow.
  std::vector<double> x(n);
  const double inv = 1.0 / top;
  for (std::size_t i = 0; i < n; ++i) x[i] = f[i] * inv;
  double s;
  const auto& k = kernels::active();
  const bool integral = p == std::floor(p) && p <= 4096;
  if (integral) {
    const auto ip = static_cast<unsigned>(p);
    s = mu ? k.weighted_abs_pow_sum(mu->values().data(), x.data(), n, ip) : k.abs_pow_sum(x.data(), n, ip);
  } else {
    s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = mu ? (*mu)[i] : 1.0;
      if (w != 0.0) s += w * std::pow(std::abs(x[i]), p);
    }
  }
  return top * std::pow(s / static_cast<double>(n), 1.0 / p);
}

}  // namespace

double lp_norm(const FuncR& f, double p) { return lp_impl(f, p, nullptr); }

double lp_norm(const FuncR& f, double p, const FuncR& mu) {
  check_same(f.group(), mu.group());
  return lp_impl(f, p, &mu);
}

}  // namespace km
