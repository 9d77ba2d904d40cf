#pragma once

// JSON file formats and digests.
//
//   set          {"group":"Z5xZ5","elements":[[0,1],[2,3]]}
//   integer set  {"n":100,"elements":[1,2,4]}
//   bohr         {"group":"Z101","freqs":[[1]],"widths":[0.5]}
//   trace        see ffq_trace_to_json / znz_trace_to_json
//
// Dumps are canonical: keys sorted, no whitespace, shortest round-trip doubles.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "km/bohr.hpp"
#include "km/pipelines.hpp"

namespace km {

using json = nlohmann::json;

std::string sha256_hex(std::string_view bytes);
std::string canonical(const json& j);
std::string digest(const json& j);  // sha256_hex(canonical(j))

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

json element_to_json(const Group& g, std::size_t index);
std::size_t element_from_json(const Group& g, const json& j);

json set_to_json(const GSet& a);
GSet set_from_json(const json& j, std::size_t cap = default_size_cap());

struct IntegerSet {
  std::int64_t n = 0;
  std::vector<std::int64_t> elements;  // sorted, distinct, inside [1, n]
};
json integer_set_to_json(const IntegerSet& s);
IntegerSet integer_set_from_json(const json& j);

json bohr_to_json(const BohrSet& b);
BohrSet bohr_from_json(const json& j, std::size_t cap = default_size_cap());

json ap_to_json(const Group& g, const APRun& run);

json ffq_step_to_json(const FfqStep& s, bool with_certificate = true);
json ffq_trace_to_json(const FfqTrace& t);
FfqTrace ffq_trace_from_json(const json& j);

json znz_step_to_json(const ZnzStep& s, bool with_certificate = true);
json znz_trace_to_json(const ZnzTrace& t);
ZnzTrace znz_trace_from_json(const json& j);

json ap_report_to_json(const APReport& r);

}  // namespace km
