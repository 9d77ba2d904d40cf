#pragma once

// Brute-force lemma suites and the empirical-constants ledger.
//
// A suite runs a generator per instance index with an Rng derived from
// (seed, index), checks the statement's hypotheses first (violating instances
// are regenerated and counted as discarded) and then asserts the conclusion.
// Reports are deterministic: aggregation is min/max/count only and results
// are combined in index order.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "km/constants.hpp"
#include "km/rng.hpp"

namespace km {

struct SuiteSpec {
  std::string suite_id;
  std::size_t instances = 0;  // 0 selects the suite default
  std::uint64_t seed = 42;
  bool exhaustive = false;    // enumerate all small instances instead of sampling
  bool calibrate = false;     // measure ledger constants instead of asserting them
  unsigned threads = 0;       // 0 = hardware concurrency
};

// Outcome of one instance.
struct InstanceResult {
  bool discarded = false;      // no hypothesis-satisfying instance within the retry budget
  std::size_t regenerated = 0; // hypothesis-violating draws thrown away
  bool failed = false;
  double margin = std::numeric_limits<double>::infinity();  // worst slack; negative on failure
  std::string message;
  nlohmann::json payload;      // instance data for failures
  std::map<std::string, double> observed;
};

struct SuiteFailure {
  std::size_t index;
  std::string message;
  double margin;
  nlohmann::json payload;  // includes suite, seed, index, exhaustive
};

struct LedgerCheck {
  std::string constant;
  double observed;
  double ledger;
  bool ok;
};

struct SuiteReport {
  std::string suite_id;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  bool calibrate = false;
  std::size_t instances = 0;  // instances run
  std::size_t discarded = 0;
  std::size_t regenerated = 0;
  std::vector<SuiteFailure> failures;
  double min_margin = 0.0;
  std::map<std::string, double> empirical;  // ledger constants measured by this suite
  std::map<std::string, double> observed;   // other aggregates
  std::map<std::string, std::string> notes;
  std::vector<LedgerCheck> ledger;
  double wall_time = 0.0;  // seconds; not part of the JSON report

  bool passed() const;
};

std::vector<std::string> suite_ids();
bool has_suite(const std::string& id);
// Default instance count (sampled) and the exhaustive enumeration size.
std::size_t default_instances(const std::string& id);
std::optional<std::size_t> exhaustive_instances(const std::string& id);

// Throws DomainError on an unknown suite id.
SuiteReport run_suite(const SuiteSpec& spec, const Constants& k = Constants::defaults());

// Re-runs one instance standalone, as recorded in a failure payload.
InstanceResult run_instance(const std::string& suite_id, std::uint64_t seed, std::size_t index, bool exhaustive,
                            const Constants& k = Constants::defaults());

nlohmann::json report_to_json(const SuiteReport& r);

// Ledger field measured by a suite, or empty.
std::string ledger_constant(const std::string& suite_id);

// Writes the calibrated values of r into the ledger file at path, keeping
// the other constants.
void write_calibration(const std::string& path, const SuiteReport& r, const Constants& current);

}  // namespace km
