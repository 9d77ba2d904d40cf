#include "km/group.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <numeric>

#include "km/error.hpp"
#include "km/kernels.hpp"

namespace km {

std::size_t default_size_cap() {
  static const std::size_t cap = [] {
    if (const char* env = std::getenv("KM_SIZE_CAP")) {
      std::size_t v = 0;
      const std::string_view s(env);
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec == std::errc() && p == s.data() + s.size() && v > 0) return v;
    }
    return kDefaultSizeCap;
  }();
  return cap;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

namespace {

std::uint64_t parse_uint(std::string_view s, std::size_t& pos, std::string_view spec) {
  const std::size_t start = pos;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  if (pos == start) throw ParseError("group spec '" + std::string(spec) + "': expected integer");
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data() + start, s.data() + pos, v);
  if (ec != std::errc()) throw ParseError("group spec '" + std::string(spec) + "': integer out of range");
  return v;
}

}  // namespace

Group::Group(std::vector<std::uint32_t> orders, std::size_t cap) : orders_(std::move(orders)) {
  if (orders_.empty()) throw DomainError("group must have at least one cyclic factor");
  strides_.assign(orders_.size(), 1);
  unsigned __int128 total = 1;
  for (std::size_t j = orders_.size(); j-- > 0;) {
    if (orders_[j] == 0) throw DomainError("cyclic order must be >= 1");
    strides_[j] = static_cast<std::size_t>(total);
    total *= orders_[j];
    if (total > cap) {
      throw CapExceeded("group size exceeds cap of " + std::to_string(cap) + " cells");
    }
  }
  size_ = static_cast<std::size_t>(total);
}

Group Group::parse(std::string_view spec, std::size_t cap) {
  std::string_view s = spec;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw ParseError("empty group spec");
  std::vector<std::uint32_t> orders;
  std::size_t pos = 0;
  while (true) {
    if (pos >= s.size() || (s[pos] != 'Z' && s[pos] != 'F')) {
      throw ParseError("group spec '" + std::string(spec) + "': expected 'Z' or 'F'");
    }
    const bool field = s[pos] == 'F';
    ++pos;
    const std::uint64_t m = parse_uint(s, pos, spec);
    std::uint64_t e = 1;
    if (pos < s.size() && s[pos] == '^') {
      ++pos;
      e = parse_uint(s, pos, spec);
      if (e == 0) throw ParseError("group spec '" + std::string(spec) + "': exponent must be >= 1");
    }
    if (m == 0) throw DomainError("group spec '" + std::string(spec) + "': order 0");
    if (m > 0xffffffffULL) throw CapExceeded("cyclic order too large");
    if (field && !is_prime(m)) {
      throw ParseError("group spec '" + std::string(spec) + "': F" + std::to_string(m) + " is not a prime field");
    }
    if (e > 64) throw CapExceeded("exponent too large");
    for (std::uint64_t i = 0; i < e; ++i) orders.push_back(static_cast<std::uint32_t>(m));
    if (pos == s.size()) break;
    if (s[pos] != 'x') throw ParseError("group spec '" + std::string(spec) + "': expected 'x'");
    ++pos;
  }
  return Group(std::move(orders), cap);
}

std::uint32_t Group::prime_field() const {
  const std::uint32_t q = orders_.front();
  for (auto m : orders_) {
    if (m != q) return 0;
  }
  return is_prime(q) ? q : 0;
}

std::string Group::to_string() const {
  std::string out;
  for (std::size_t j = 0; j < orders_.size();) {
    std::size_t run = 1;
    while (j + run < orders_.size() && orders_[j + run] == orders_[j]) ++run;
    if (!out.empty()) out += 'x';
    out += 'Z' + std::to_string(orders_[j]);
    if (run > 1) out += '^' + std::to_string(run);
    j += run;
  }
  return out;
}

Element Group::element(std::size_t index) const {
  Element e;
  e.coords.resize(orders_.size());
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    e.coords[j] = static_cast<std::uint32_t>((index / strides_[j]) % orders_[j]);
  }
  return e;
}

std::size_t Group::index(const Element& e) const {
  if (e.coords.size() != orders_.size()) {
    throw DomainError("element rank " + std::to_string(e.coords.size()) + " does not match group rank " +
                      std::to_string(orders_.size()));
  }
  std::size_t idx = 0;
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    if (e.coords[j] >= orders_[j]) throw DomainError("element coordinate not reduced");
    idx += e.coords[j] * strides_[j];
  }
  return idx;
}

std::size_t Group::index_of(std::span<const std::int64_t> coords) const {
  if (coords.size() != orders_.size()) throw DomainError("element rank does not match group rank");
  std::size_t idx = 0;
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    const auto m = static_cast<std::int64_t>(orders_[j]);
    std::int64_t r = coords[j] % m;
    if (r < 0) r += m;
    idx += static_cast<std::size_t>(r) * strides_[j];
  }
  return idx;
}

std::size_t Group::add(std::size_t a, std::size_t b) const {
  if (orders_.size() == 1) {
    const std::size_t s = a + b;
    return s >= size_ ? s - size_ : s;
  }
  std::size_t idx = 0;
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    const std::size_t m = orders_[j];
    std::size_t d = (a / strides_[j]) % m + (b / strides_[j]) % m;
    if (d >= m) d -= m;
    idx += d * strides_[j];
  }
  return idx;
}

std::size_t Group::neg(std::size_t a) const {
  if (orders_.size() == 1) return a == 0 ? 0 : size_ - a;
  std::size_t idx = 0;
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    const std::size_t m = orders_[j];
    const std::size_t d = (a / strides_[j]) % m;
    idx += (d == 0 ? 0 : m - d) * strides_[j];
  }
  return idx;
}

std::size_t Group::sub(std::size_t a, std::size_t b) const { return add(a, neg(b)); }

std::size_t Group::scale(std::int64_t k, std::size_t a) const {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < orders_.size(); ++j) {
    const auto m = static_cast<std::int64_t>(orders_[j]);
    const auto d = static_cast<std::int64_t>((a / strides_[j]) % orders_[j]);
    std::int64_t km = k % m;
    if (km < 0) km += m;
    const auto r = static_cast<std::size_t>((static_cast<__int128>(km) * d) % m);
    idx += r * strides_[j];
  }
  return idx;
}

std::int64_t gcd_with_order(std::int64_t k, std::size_t order) {
  return std::gcd(k < 0 ? -k : k, static_cast<std::int64_t>(order));
}

// ---------------------------------------------------------------------------

GSet::GSet(Group g) : group_(std::move(g)), words_((group_.size() + 63) / 64, 0) {}

GSet GSet::full(const Group& g) {
  GSet s(g);
  for (auto& w : s.words_) w = ~std::uint64_t{0};
  const std::size_t tail = g.size() & 63U;
  if (tail != 0) s.words_.back() = (std::uint64_t{1} << tail) - 1;
  s.card_ = g.size();
  return s;
}

GSet GSet::from_indices(const Group& g, std::span<const std::size_t> idx) {
  GSet s(g);
  for (auto i : idx) {
    if (i >= g.size()) throw DomainError("element index out of range");
    s.insert(i);
  }
  return s;
}

GSet GSet::from_elements(const Group& g, std::span<const Element> elems) {
  GSet s(g);
  for (const auto& e : elems) {
    const std::size_t i = g.index(e);
    if (s.contains(i)) throw DomainError("duplicate element in set");
    s.insert(i);
  }
  return s;
}

void GSet::insert(std::size_t i) {
  const std::uint64_t bit = std::uint64_t{1} << (i & 63U);
  if (!(words_[i >> 6] & bit)) {
    words_[i >> 6] |= bit;
    ++card_;
  }
}

void GSet::erase(std::size_t i) {
  const std::uint64_t bit = std::uint64_t{1} << (i & 63U);
  if (words_[i >> 6] & bit) {
    words_[i >> 6] &= ~bit;
    --card_;
  }
}

std::vector<std::size_t> GSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(card_);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      const int b = __builtin_ctzll(bits);
      out.push_back(w * 64 + static_cast<std::size_t>(b));
      bits &= bits - 1;
    }
  }
  return out;
}

GSet GSet::translate(std::size_t t) const {
  GSet out(group_);
  for (auto i : indices()) out.insert(group_.add(i, t));
  return out;
}

GSet GSet::negate() const {
  GSet out(group_);
  for (auto i : indices()) out.insert(group_.neg(i));
  return out;
}

GSet GSet::complement() const {
  GSet out = full(group_);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] &= ~words_[w];
  out.card_ = group_.size() - card_;
  return out;
}

void GSet::check_same(const GSet& other) const {
  if (!(group_ == other.group_)) throw GroupMismatch();
}

bool GSet::subset_of(const GSet& other) const {
  check_same(other);
  return intersect_count(other) == card_;
}

std::size_t GSet::intersect_count(const GSet& other) const {
  check_same(other);
  return kernels::active().and_popcount(words_.data(), other.words_.data(), words_.size());
}

GSet& GSet::operator&=(const GSet& other) {
  check_same(other);
  const auto& k = kernels::active();
  k.and_into(words_.data(), other.words_.data(), words_.size());
  card_ = k.popcount(words_.data(), words_.size());
  return *this;
}

GSet& GSet::operator|=(const GSet& other) {
  check_same(other);
  const auto& k = kernels::active();
  k.or_into(words_.data(), other.words_.data(), words_.size());
  card_ = k.popcount(words_.data(), words_.size());
  return *this;
}

GSet dilate_set(const GSet& a, std::int64_t k) {
  const Group& g = a.group();
  if (gcd_with_order(k, g.size()) != 1) {
    throw DomainError("dilation factor " + std::to_string(k) + " is not coprime to |G| = " +
                      std::to_string(g.size()));
  }
  GSet out(g);
  for (auto i : a.indices()) out.insert(g.scale(k, i));
  return out;
}

GSet sumset(const GSet& a, const GSet& b) {
  if (!(a.group() == b.group())) throw GroupMismatch();
  GSet out(a.group());
  if (a.empty() || b.empty()) return out;
  const GSet& small = a.card() <= b.card() ? a : b;
  const GSet& large = a.card() <= b.card() ? b : a;
  for (auto s : small.indices()) {
    out |= large.translate(s);
    if (out.card() == out.group().size()) break;
  }
  return out;
}

std::uint64_t count_3aps(const GSet& a) {
  // (x, x+d, x+2d) = (a, b, 2b - a) for a, b in A.
  const Group& g = a.group();
  const auto idx = a.indices();
  std::uint64_t count = 0;
  for (auto b : idx) {
    const std::size_t twice_b = g.add(b, b);
    for (auto x : idx) {
      if (a.contains(g.sub(twice_b, x))) ++count;
    }
  }
  return count;
}

std::uint64_t count_3aps_integers(std::span<const std::int64_t> a) {
  std::vector<std::int64_t> sorted(a.begin(), a.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t count = 0;
  for (auto b : sorted) {
    for (auto x : sorted) {
      if (std::binary_search(sorted.begin(), sorted.end(), 2 * b - x)) ++count;
    }
  }
  return count;
}

}  // namespace km
