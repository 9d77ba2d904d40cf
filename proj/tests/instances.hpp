#pragma once

// Seeded instance generators shared by the unit tests and the acceptance
// binary, plus golden-file access.

#include <cstdlib>
#include <filesystem>
#include <string>

#include "km/bohr.hpp"
#include "km/io.hpp"
#include "km/rng.hpp"
#include "km/steps.hpp"

namespace fixtures {

inline std::string golden_path(const std::string& name) { return std::string(KM_GOLDEN_DIR) + "/" + name; }

// Golden JSON: rewritten when KM_UPDATE_GOLDEN=1, otherwise read back.
// Returns null when the file is missing.
inline km::json golden(const std::string& name, const km::json& current) {
  const std::string path = golden_path(name);
  const char* update = std::getenv("KM_UPDATE_GOLDEN");
  if (update != nullptr && std::string(update) == "1") km::write_json_file(path, current);
  if (!std::filesystem::exists(path)) return nullptr;
  return km::read_json_file(path);
}

struct SmoothingInstance {
  km::BohrSet b, bp;
  km::GSet a1, a2, s;
  double eps;
};

inline km::GSet random_subset(km::Rng& rng, const km::GSet& base, double density) {
  km::GSet out(base.group());
  const auto idx = base.indices();
  for (auto i : idx) {
    if (rng.coin(density)) out.insert(i);
  }
  if (out.empty()) out.insert(idx[rng.below(idx.size())]);
  return out;
}

// Rank-1 Bohr interval B on Z101, B' a regular dilate inside it, A1 inside B,
// A2 inside B', S inside B + B'.
inline SmoothingInstance smoothing_instance(std::uint64_t seed) {
  km::Rng rng(seed);
  const km::Group g = km::Group::cyclic(101);
  SmoothingInstance in;
  const auto freq = static_cast<std::size_t>(rng.between(1, 100));
  in.b = km::regular_dilate(km::bohr_build(g, {freq}, {rng.uniform(0.8, 2.0)})).set;
  in.bp = km::regular_dilate(km::dilate(in.b, rng.uniform(0.2, 0.5))).set;
  in.a1 = random_subset(rng, in.b.members(), rng.uniform(0.3, 0.8));
  in.a2 = random_subset(rng, in.bp.members(), rng.uniform(0.3, 0.8));
  in.s = random_subset(rng, in.b.members(), rng.uniform(0.3, 0.9));
  in.eps = 0.05;
  return in;
}

inline constexpr std::uint64_t kSmoothingSeed = 1000;
inline constexpr std::size_t kSmoothingInstances = 50;

struct SmoothingTally {
  std::size_t found = 0;
  std::size_t not_found = 0;
  bool margins_reported = true;  // every miss carries a finite negative margin
};

inline SmoothingTally smoothing_tally() {
  SmoothingTally t;
  km::SmoothingBudget budget;
  budget.freqs = 3;
  for (std::size_t i = 0; i < kSmoothingInstances; ++i) {
    const SmoothingInstance in = smoothing_instance(kSmoothingSeed + i);
    const km::SmoothingBohr r = km::find_smoothing_bohr(in.b, in.bp, in.a1, in.a2, in.s, in.eps, budget);
    if (r.found) {
      ++t.found;
    } else {
      ++t.not_found;
      t.margins_reported = t.margins_reported && r.best_margin < 0 && r.best_margin > -1e300;
    }
  }
  return t;
}

}  // namespace fixtures
