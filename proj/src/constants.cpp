#include "km/constants.hpp"

#include <fstream>

#include "km/error.hpp"

namespace km {

namespace {

#define KM_CONSTANT_FIELDS(X) \
  X(reg_const)                \
  X(c_narrow)                 \
  X(c_bohr)                   \
  X(k_hold)                   \
  X(k_unb)                    \
  X(c_inc)                    \
  X(k_regconv)                \
  X(c_cover)                  \
  X(c_posdef)                 \
  X(c_sumset)

}  // namespace

const Constants& Constants::defaults() {
  static const Constants c{};
  return c;
}

std::string Constants::default_path() {
#ifdef KM_DEFAULT_CONSTANTS_PATH
  return KM_DEFAULT_CONSTANTS_PATH;
#else
  return "constants.json";
#endif
}

nlohmann::json Constants::to_json() const {
  nlohmann::json j;
#define X(name) j[#name] = name;
  KM_CONSTANT_FIELDS(X)
#undef X
  return j;
}

Constants Constants::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("constants ledger must be a JSON object");
  Constants c;
#define X(name)                                                                   \
  if (j.contains(#name)) {                                                        \
    if (!j.at(#name).is_number()) throw ParseError("constant " #name " is not a number"); \
    c.name = j.at(#name).get<double>();                                           \
  }
  KM_CONSTANT_FIELDS(X)
#undef X
  return c;
}

Constants Constants::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return defaults();
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("constants ledger " + path + ": " + e.what());
  }
  if (j.contains("constants")) return from_json(j.at("constants"));
  return from_json(j);
}

}  // namespace km
