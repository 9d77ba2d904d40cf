#pragma once

// Bohr sets B = {x : |1 - gamma(x)| <= nu(gamma) for all gamma in Gamma}.
//
// |1 - gamma(x)| is evaluated as 2 sin(pi t) from the exact rational phase
// t = min(n, L - n) / L, so x and -x always see the same value. A point is a
// member when |1 - gamma(x)| <= nu (1 + 1e-12); ties count as members.

#include <optional>
#include <vector>

#include "km/group.hpp"

namespace km {

inline constexpr double kBohrTol = 1e-12;

struct Regularity {
  bool regular;
  double margin;  // worst normalized slack; regular iff margin >= 0
};

class BohrSet {
 public:
  BohrSet() = default;

  const Group& group() const { return members_.group(); }
  const std::vector<std::size_t>& freqs() const { return freqs_; }
  const std::vector<double>& widths() const { return widths_; }
  const GSet& members() const { return members_; }
  std::size_t rank() const { return freqs_.size(); }
  std::size_t size() const { return members_.card(); }
  const std::optional<Regularity>& regularity() const { return regularity_; }

 private:
  friend BohrSet bohr_build(const Group&, std::vector<std::size_t>, std::vector<double>);
  friend BohrSet freq_dilate(const BohrSet&, std::int64_t);
  friend Regularity is_regular(BohrSet&, double);

  std::vector<std::size_t> freqs_;
  std::vector<double> widths_;
  GSet members_;
  std::optional<Regularity> regularity_;
};

// Frequencies are dual elements given by their group index.
BohrSet bohr_build(const Group& g, std::vector<std::size_t> freqs, std::vector<double> widths);

// Same frequencies, widths rho * nu clamped to [0, 2].
BohrSet dilate(const BohrSet& b, double rho);

// |1 - gamma(x)| for every x.
std::vector<double> character_distance(const Group& g, std::size_t gamma);

// r(x) = max_gamma |1 - gamma(x)| / nu(gamma); x is in B_rho iff
// r(x) <= rho (1 + 1e-12) up to rounding. Zero widths give 0 or infinity.
std::vector<double> bohr_ratios(const Group& g, const std::vector<std::size_t>& freqs,
                                const std::vector<double>& widths);

// Exact decision from the breakpoints of rho -> |B_rho| on [1 - K, 1 + K],
// K = 1/(R d). Caches the result on b.
Regularity is_regular(BohrSet& b, double reg_const = 100.0);
Regularity regularity_of(const BohrSet& b, double reg_const = 100.0);

struct RegularDilate {
  BohrSet set;
  double rho;
};
// Largest rho in [1/2, 1] found with B_rho regular; InternalError otherwise.
RegularDilate regular_dilate(const BohrSet& b, double reg_const = 100.0);

// Bohr set with member set {k x : x in B}.
BohrSet freq_dilate(const BohrSet& b, std::int64_t k);

// Frequencies of b followed by the new ones of b2; shared frequencies take
// the smaller width.
BohrSet join(const BohrSet& b, const BohrSet& b2);

struct APRun {
  std::size_t start = 0;
  std::size_t step = 0;
  std::size_t length = 1;

  std::size_t term(const Group& g, std::size_t j) const { return g.add(start, g.scale(static_cast<std::int64_t>(j), step)); }
  bool inside(const GSet& s) const;
};

struct ExtractedAP {
  APRun run;
  std::size_t lemma_bound;  // max(1, floor(1/rho)), rho = 4 (2/|B|)^{1/d}
};

// Requires |G| prime. Returns the longest run found over the most central
// steps of B, which is at least the lemma bound.
ExtractedAP extract_ap(const BohrSet& b);

}  // namespace km
