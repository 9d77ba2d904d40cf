#pragma once

// AP-free constructions and the two density-increment drivers.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "km/bohr.hpp"
#include "km/constants.hpp"
#include "km/steps.hpp"

namespace km {

// ---------------------------------------------------------------------------
// Constructions

enum class BehrendStrategy { Ternary, Sphere };

struct BehrendSet {
  std::int64_t n = 0;
  BehrendStrategy strategy = BehrendStrategy::Ternary;
  std::vector<std::int64_t> elements;  // sorted, inside [1, n]
  int dim = 0;                         // sphere: digits per vector
  std::int64_t digits = 0;             // sphere: digit range [0, digits)
  std::int64_t radius = 0;             // sphere: squared radius
};

// Ternary: 1 + x for x in [0, n) with base-3 digits in {0, 1}.
// Sphere: 1 + x for digit vectors x in [0, k)^d, base 2k - 1, on the most
// populated sphere; d swept over 2 .. ceil(sqrt(log n)) + 2.
BehrendSet behrend(std::int64_t n, BehrendStrategy strategy);

// No nontrivial 3-AP: the ordered count equals |A|.
bool is_ap_free(std::span<const std::int64_t> a);

struct Embedded {
  Group group;
  GSet set;
};

// A inside [1, n] placed in Z_{3n+1}; 3-APs correspond one to one.
Embedded embed_interval(std::span<const std::int64_t> a, std::int64_t n);

// Longest run start + j step (step a unit, j < length) inside s, over a
// cyclic group. Ties go to the smallest (step, start).
APRun longest_ap(const GSet& s);

// ---------------------------------------------------------------------------
// Traces

enum class Terminal { NearUniform, BudgetExceeded };
const char* to_string(Terminal t);

struct Replay {
  bool ok = true;
  std::string message;
};

// Driver over F_q^n. The current cell is origin + span(basis) and A_i is the
// pullback of A to F_q^{dim}.
struct FfqStep {
  std::size_t dim;                                 // dimension the step ran on
  std::vector<std::vector<std::uint32_t>> checks;  // V as parity checks, cell coordinates
  std::vector<std::uint32_t> translate;            // densest coset t + V
  std::size_t count;                               // |A_i cap (t + V)|
  std::size_t v_size;                              // |V|
  double alpha;                                    // density of A_i
  double density;                                  // count / v_size
  int p;                                           // Hoelder exponent
  int p_prime;                                     // after unbalancing
  int p_used;                                      // after sifting
  std::string certificate;                         // digest of the step record
};

struct FfqConfig {
  std::size_t codim_max = 4;
  std::uint64_t max_scan = 1u << 18;
  std::size_t max_steps = 64;
};

struct FfqTrace {
  Group group;
  double eps = 0.0;
  FfqConfig config;
  std::vector<FfqStep> steps;
  Terminal terminal = Terminal::BudgetExceeded;
  std::string reason;
  double margin = 0.0;  // slack of the failed test on a budget terminal
  std::vector<std::uint32_t> origin;              // final cell
  std::vector<std::vector<std::uint32_t>> basis;  // final cell
  std::size_t final_count = 0;                    // |A_t|
  double final_density = 0.0;
  std::uint64_t final_3aps = 0;  // ordered count inside the final cell
  double inner_value = 0.0;      // <mu * mu, mu_{2 A_t}> on the final cell
};

// A nonempty subset of Z_q^n, q an odd prime.
FfqTrace roth_ffq_driver(const GSet& a, double eps, const FfqConfig& cfg = {},
                         const Constants& k = Constants::defaults());
Replay replay_ffq(const GSet& a, const FfqTrace& trace, const Constants& k = Constants::defaults());

// Pullback of a to origin + span(basis), as a subset of Z_q^{|basis|}.
GSet pull_back(const GSet& a, const std::vector<std::uint32_t>& origin,
               const std::vector<std::vector<std::uint32_t>>& basis);

// Driver over a cyclic group with Bohr-set cells.
enum class ZnzMode { ThreeAP, Sumset };

struct ZnzConfig {
  ZnzMode mode = ZnzMode::ThreeAP;
  std::size_t max_steps = 6;
  std::uint64_t max_scan = 1u << 16;
  SmoothingBudget smoothing{};
};

struct ZnzStep {
  std::string kind;  // "narrow-bprime", "narrow-bdoubleprime", "smoothing"
  BohrSet cell;
  std::size_t shift;  // A_{t+1} = (A_t - shift) cap cell
  std::size_t count;  // |A_{t+1}|
  double alpha;       // density of A_t in the previous cell
  double density;     // count / |cell|
  int p = 0;
  int p_prime = 0;
  int p_used = 0;
  std::string certificate;
};

struct ZnzTrace {
  Group group;
  ZnzMode mode = ZnzMode::ThreeAP;
  double eps = 0.0;
  ZnzConfig config;
  std::vector<ZnzStep> steps;
  Terminal terminal = Terminal::BudgetExceeded;
  std::string reason;
  double margin = 0.0;
  BohrSet cell;                   // B_t
  std::size_t total_shift = 0;    // A_t is inside A - total_shift
  std::size_t cell_count = 0;     // |A_t|
  double alpha = 0.0;             // |A_t| / |B_t|
  // Narrowed pair at the terminal (NearUniform only).
  BohrSet bp, bpp;
  std::size_t x = 0;              // A' = (A_t - x) cap bp
  double inner_value = 0.0;       // ThreeAP: <mu_A' * mu_A', mu_{2 A''}>; Sumset: mu_{bpp}(A' + A')
  double target = 0.0;            // ThreeAP: mu(bp)^-1 / 2; Sumset: 1 - alpha' / 4
  std::uint64_t count_3aps = 0;   // of the input set
};

ZnzTrace znz_driver(const GSet& a, double eps, const ZnzConfig& cfg = {},
                    const Constants& k = Constants::defaults());
// Embeds A inside [1, n] into Z_M, M = 3n + 1 when odd and 3n + 2 otherwise,
// so that 2 is a unit.
ZnzTrace roth_znz_driver(std::span<const std::int64_t> a, std::int64_t n, double eps, const ZnzConfig& cfg = {},
                         const Constants& k = Constants::defaults());
Replay replay_znz(const GSet& a, const ZnzTrace& trace, const Constants& k = Constants::defaults());

// A_t recomputed from A and the recorded steps.
GSet znz_cell_set(const GSet& a, const ZnzTrace& trace);

// ---------------------------------------------------------------------------
// Long progressions in A + A + A

struct APReport {
  ZnzTrace trace;
  bool argument_ok = false;
  std::string stage;    // first failed check when !argument_ok
  double margin = 0.0;  // its slack (negative)
  double rho = 0.0;     // B'' = B'_rho, rho = c_sumset alpha' / rk
  BohrSet b2;           // B''
  std::size_t covered = 0;  // |B'' cap (A' + A' + A')|
  APRun run;                // inside A + A + A
  std::size_t lemma_bound = 0;
  bool verified = false;    // run re-checked against A + A + A by membership
  APRun direct;             // exhaustive longest AP of A + A + A
};

// A is a subset of Z_N with N prime.
APReport three_sumset_ap_pipeline(const GSet& a, double eps, const ZnzConfig& cfg = {},
                                  const Constants& k = Constants::defaults());
// A inside [1, n], reduced into Z_P with P the least prime >= n.
APReport three_sumset_ap_pipeline(std::span<const std::int64_t> a, std::int64_t n, double eps,
                                  const ZnzConfig& cfg = {}, const Constants& k = Constants::defaults());

std::uint64_t least_prime_at_least(std::uint64_t n);

}  // namespace km
