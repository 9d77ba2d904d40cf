#pragma once

// Internal suite table shared by verify.cpp and suites.cpp.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "km/constants.hpp"
#include "km/rng.hpp"
#include "km/verify.hpp"

namespace km::suites {

enum class Agg { Max, Min, Sum };

struct Context {
  const Constants& k;
  bool exhaustive;
  bool calibrate;
};

struct Prelude {
  bool ok = true;
  std::string message;
  std::map<std::string, std::string> notes;
};

struct Suite {
  std::string id;
  std::size_t default_instances = 200;
  std::size_t exhaustive_count = 0;  // 0: no exhaustive mode
  std::function<Prelude(const Constants&)> prelude;
  std::function<InstanceResult(std::size_t index, Rng& rng, const Context& ctx)> run;
  std::map<std::string, Agg> aggregate;  // observed keys; unlisted keys take the max
  // Ledger constant measured by this suite: the observed key holding it, the
  // Constants field, and whether the observation must stay below the ledger.
  std::string ledger_key;
  std::string ledger_field;
  bool ledger_upper = true;
};

const std::vector<Suite>& registry();

}  // namespace km::suites
