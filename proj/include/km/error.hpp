#pragma once

#include <stdexcept>
#include <string>

namespace km {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed group spec, JSON file or CLI value.
struct ParseError : Error {
  using Error::Error;
};

// Operands live on different groups.
struct GroupMismatch : Error {
  GroupMismatch() : Error("operands belong to different groups") {}
};

// An operation's precondition does not hold (empty set, gcd != 1, p < 1, ...).
struct DomainError : Error {
  using Error::Error;
};

struct CapExceeded : Error {
  using Error::Error;
};

// A lemma's quantitative hypothesis is not met by the supplied instance.
struct HypothesisViolation : Error {
  using Error::Error;
};

// A conclusion that is only falsifiable through an unspecified implicit
// constant failed. The message names the constant.
struct ConstantBustingInstance : Error {
  std::string constant;
  ConstantBustingInstance(std::string which, const std::string& what)
      : Error(what), constant(std::move(which)) {}
};

// A desk-scale search exhausted its budget. Not a disproof.
struct OracleBudgetExceeded : Error {
  using Error::Error;
};

// Dependent random choice found no certified shift vector within its budget.
struct SiftExhausted : Error {
  double best_f_margin;
  double best_density_margin;
  SiftExhausted(const std::string& what, double f_margin, double density_margin)
      : Error(what), best_f_margin(f_margin), best_density_margin(density_margin) {}
};

struct InternalError : Error {
  using Error::Error;
};

}  // namespace km
