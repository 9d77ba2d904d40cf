#pragma once

// Finite abelian groups Z_{m_1} x ... x Z_{m_r} and their subsets.
//
// Elements are indexed lexicographically: the first coordinate is the most
// significant digit, so the last cyclic factor is contiguous in memory. Every
// dense array in the library (functions, spectra, bitmaps) uses this order.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace km {

// Default ceiling on |G|; KM_SIZE_CAP in the environment overrides it.
inline constexpr std::size_t kDefaultSizeCap = std::size_t{1} << 26;
std::size_t default_size_cap();

struct Element {
  std::vector<std::uint32_t> coords;

  friend auto operator<=>(const Element&, const Element&) = default;
};

class Group {
 public:
  Group() : Group(std::vector<std::uint32_t>{1}) {}
  explicit Group(std::vector<std::uint32_t> orders, std::size_t cap = default_size_cap());

  // Grammar: factor ("x" factor)*, factor := ("Z"|"F") INT ["^" INT].
  // "Fq^n" requires q prime.
  static Group parse(std::string_view spec, std::size_t cap = default_size_cap());
  static Group cyclic(std::uint32_t n) { return Group(std::vector<std::uint32_t>{n}); }

  std::span<const std::uint32_t> orders() const { return orders_; }
  std::size_t rank() const { return orders_.size(); }
  std::size_t size() const { return size_; }
  std::size_t stride(std::size_t j) const { return strides_[j]; }
  bool is_cyclic() const { return orders_.size() == 1; }
  // q when the group is Z_q^n with q prime, 0 otherwise.
  std::uint32_t prime_field() const;
  // Canonical spec string ("Z5", "Z3^2", "Z4xZ6").
  std::string to_string() const;

  Element element(std::size_t index) const;
  // Throws DomainError unless every coordinate is reduced.
  std::size_t index(const Element& e) const;
  // Reduces arbitrary integer coordinates.
  std::size_t index_of(std::span<const std::int64_t> coords) const;

  std::size_t add(std::size_t a, std::size_t b) const;
  std::size_t sub(std::size_t a, std::size_t b) const;
  std::size_t neg(std::size_t a) const;
  std::size_t scale(std::int64_t k, std::size_t a) const;

  friend bool operator==(const Group& a, const Group& b) { return a.orders_ == b.orders_; }

 private:
  std::vector<std::uint32_t> orders_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

bool is_prime(std::uint64_t n);

std::int64_t gcd_with_order(std::int64_t k, std::size_t order);

// Subset of a group as a bitmap with cached cardinality.
class GSet {
 public:
  GSet() : GSet(Group()) {}
  explicit GSet(Group g);

  static GSet full(const Group& g);
  static GSet from_indices(const Group& g, std::span<const std::size_t> idx);
  // Duplicates are rejected with DomainError.
  static GSet from_elements(const Group& g, std::span<const Element> elems);

  const Group& group() const { return group_; }
  std::size_t card() const { return card_; }
  bool empty() const { return card_ == 0; }
  double density() const { return static_cast<double>(card_) / static_cast<double>(group_.size()); }

  bool contains(std::size_t i) const { return (words_[i >> 6] >> (i & 63U)) & 1U; }
  void insert(std::size_t i);
  void erase(std::size_t i);

  std::vector<std::size_t> indices() const;
  std::span<const std::uint64_t> words() const { return words_; }

  GSet translate(std::size_t t) const;  // A + t
  GSet negate() const;                  // -A
  GSet complement() const;
  bool subset_of(const GSet& other) const;
  std::size_t intersect_count(const GSet& other) const;

  GSet& operator&=(const GSet& other);
  GSet& operator|=(const GSet& other);
  friend GSet operator&(GSet a, const GSet& b) { return a &= b; }
  friend GSet operator|(GSet a, const GSet& b) { return a |= b; }
  friend bool operator==(const GSet& a, const GSet& b) {
    return a.group_ == b.group_ && a.words_ == b.words_;
  }

 private:
  void check_same(const GSet& other) const;

  Group group_;
  std::vector<std::uint64_t> words_;
  std::size_t card_ = 0;
};

// {k a : a in A}; requires gcd(k, |G|) = 1.
GSet dilate_set(const GSet& a, std::int64_t k);

// {a + b : a in A, b in B}.
GSet sumset(const GSet& a, const GSet& b);

// Number of ordered pairs (x, d) in G^2 with x, x+d, x+2d all in A. The d = 0
// pairs contribute |A|; every other progression is counted once per direction.
std::uint64_t count_3aps(const GSet& a);

// Integer-side count of the same convention for a set of integers.
std::uint64_t count_3aps_integers(std::span<const std::int64_t> a);

}  // namespace km
