#pragma once

// Constructive versions of the proof steps. Each returns enough data to
// recompute its certificate from the raw inputs.

#include <cstdint>
#include <optional>
#include <vector>

#include "km/bohr.hpp"
#include "km/constants.hpp"
#include "km/func.hpp"

namespace km {

// ---------------------------------------------------------------------------
// Hoelder lifting

struct BohrContext {
  const BohrSet* b;   // A is a subset of b
  const BohrSet* bp;  // C is a subset of bp, bp inside b_{c eps alpha / d}
};

enum class LiftVariant { NearUniform, Lp };

struct LiftOutcome {
  LiftVariant variant;
  int p = 0;                // when Lp
  double norm_value = 0.0;  // ||(mu_A - u) * (mu_A - u)||_{p(w)} when Lp
  double inner_value;       // <mu_A * mu_A, mu_C>
  double target;            // 1 globally, mu(B)^{-1} relative to B
  int p_bound;              // 2 ceil(K_hold log(2/gamma))
};

// Throws HypothesisViolation (Bohr context) or ConstantBustingInstance
// ("k_hold") when no even p up to the bound qualifies.
LiftOutcome holder_lift(const GSet& a, const GSet& c, double eps, const Constants& k = Constants::defaults(),
                        const BohrContext* ctx = nullptr);

// ---------------------------------------------------------------------------
// Unbalancing

struct UnbalanceOutcome {
  int p_prime;
  double norm;  // ||f + 1||_{p'(nu)}
  int bound;    // ceil(K_unb eps^-1 log(e/eps) p)
};

int unbalance_bound(double eps, int p, const Constants& k);

// Smallest p' with ||f + 1||_{p'(nu)} >= 1 + eps/2. DomainError when the
// spectra are negative or ||f||_{p(nu)} < eps; ConstantBustingInstance
// ("k_unb") when p' exceeds the bound.
// With enforce_bound = false the bound is reported but not asserted.
UnbalanceOutcome unbalance(const FuncR& f, const FuncR& nu, double eps, int p,
                           const Constants& k = Constants::defaults(), bool enforce_bound = true);

struct BohrUnbalanceOutcome {
  int p_prime;
  double norm;    // ||mu_A o mu_A||_{p'(nu)}
  double target;  // (1 + eps/4) mu(B)^{-1}
  int bound;
};

// Relative version: f = mu(B) (mu_A - mu_B) o (mu_A - mu_B). Returns the
// smallest p' with ||mu_A o mu_A||_{p'(nu)} >= (1 + eps/4) mu(B)^{-1}.
BohrUnbalanceOutcome bohr_unbalance(const GSet& a, const BohrSet& b, const FuncR& nu, double eps, int p,
                                    const Constants& k = Constants::defaults(), bool enforce_bound = true);

// ---------------------------------------------------------------------------
// Dependent random choice and sifting

struct ShiftSearch {
  enum Mode { Exhaustive, Sampled } mode = Exhaustive;
  std::uint64_t trials = 10000;   // sampled draws
  std::uint64_t seed = 0;
  std::uint64_t max_scan = 1u << 20;  // exhaustive budget
};

struct DrcResult {
  std::vector<std::size_t> shifts;
  GSet a1, a2;
  double f_value;          // <mu_A1 o mu_A2, f>
  double eta;              // <(mu_A o mu_A)^p, f>_mu / ||mu_A o mu_A||^p_{p(mu)}
  double norm_p;           // ||mu_A o mu_A||_{p(mu)}
  double density_product;  // mu_B1(A1) mu_B2(A2)
  double density_bound;    // (alpha ||mu_A o mu_A||_{p(mu)})^{2p} / 4
  std::uint64_t scanned;
};

// A_i(s) = B_i cap (A + s_1) cap ... cap (A + s_p).
GSet drc_set(const GSet& b, const GSet& a, const std::vector<std::size_t>& shifts);
// <mu_X o mu_Y, f> by pair counting.
double diffconv_pairing(const GSet& x, const GSet& y, const FuncR& f);

// HypothesisViolation when mu_A o mu_A vanishes on supp(mu_B1 o mu_B2).
DrcResult drc(const GSet& a, const GSet& b1, const GSet& b2, int p, const FuncR& f, const ShiftSearch& search);

struct SiftResult {
  DrcResult drc;
  GSet s;              // {x : mu_A o mu_A(x) > (1 - eps) ||mu_A o mu_A||_{p(mu)}}
  int p_used;          // p + ceil(eps^-1 log(2/delta))
  double inner_value;  // <mu_A1 o mu_A2, 1_S>
};

SiftResult sift(const GSet& a, const GSet& b1, const GSet& b2, int p, double eps, double delta,
                const ShiftSearch& search);

// ---------------------------------------------------------------------------
// Almost-periodicity oracles

struct Subspace {
  std::vector<std::vector<std::uint32_t>> checks;  // parity-check rows, RREF
  BohrSet bohr;                                    // same set as a zero-width Bohr set
  std::size_t codim() const { return checks.size(); }
};

Subspace subspace_from_checks(const Group& g, std::vector<std::vector<std::uint32_t>> checks);

struct SmoothingSubspace {
  Subspace v;
  double base;      // <mu_A1 o mu_A2, 1_S>
  double smoothed;  // <mu_V * mu_A1 o mu_A2, 1_S>
  std::uint64_t examined;
};

// Lowest-codimension hit in enumeration order, or nullopt.
std::optional<SmoothingSubspace> find_smoothing_subspace(const GSet& a1, const GSet& a2, const GSet& s, double eps,
                                                         std::size_t codim_max);

struct SmoothingBudget {
  std::size_t freqs = 3;
  std::size_t widths = 12;    // geometric grid 2, 1, 1/2, ...
  std::size_t min_size = 2;
};

struct SmoothingBohr {
  std::optional<BohrSet> found;
  double base;
  double smoothed;     // for the hit, or the best candidate
  double best_margin;  // eps - |smoothed - base| of the best candidate
  std::size_t candidates;
};

// Heuristic stand-in for the Bohr almost-periodicity theorem: joins of B'
// with the largest-|mu_A1^| characters. HypothesisViolation on bad inputs.
SmoothingBohr find_smoothing_bohr(const BohrSet& b, const BohrSet& bp, const GSet& a1, const GSet& a2,
                                  const GSet& s, double eps, const SmoothingBudget& budget = {},
                                  double reg_const = 100.0);

// ---------------------------------------------------------------------------
// Density increment over F_q^n

struct CosetDensity {
  std::size_t translate;
  double density;  // ||1_A * mu_V||_inf = |A cap (t + V)| / |V|
};
CosetDensity best_coset(const GSet& a, const GSet& v);

enum class IncrementVariant { NearUniform, Increment };

struct IncrementOutcome {
  IncrementVariant variant;
  LiftOutcome lift;
  std::optional<UnbalanceOutcome> unbalanced;
  std::optional<SiftResult> sifted;
  std::optional<SmoothingSubspace> smoothing;
  std::size_t translate = 0;
  double alpha;
  double new_density = 0.0;
};

struct IncrementConfig {
  std::size_t codim_max = 4;
  std::uint64_t max_scan = 1u << 18;
};

// OracleBudgetExceeded when no smoothing subspace is found.
IncrementOutcome density_increment_step(const GSet& a, const GSet& c, double eps, const IncrementConfig& cfg = {},
                                        const Constants& k = Constants::defaults());

// ---------------------------------------------------------------------------
// Bourgain narrowing

enum class NarrowVariant { IncOnBprime, IncOnBdoubleprime, Translate };

struct NarrowOutcome {
  NarrowVariant variant;
  std::size_t x;  // translate or argmax
  double d1;      // |A cap (x + B')| / |B'|
  double d2;      // |A cap (x + B'')| / |B''|
  double alpha;
};

// Relative densities |A cap (x + X)| / |X| for every x.
std::vector<double> translate_densities(const GSet& a, const GSet& x);

NarrowOutcome bour_narrow(const GSet& a, const BohrSet& b, const BohrSet& bp, const BohrSet& bpp, double eps,
                          const Constants& k = Constants::defaults());

const char* to_string(LiftVariant v);
const char* to_string(IncrementVariant v);
const char* to_string(NarrowVariant v);

}  // namespace km
