#pragma once

#include <iosfwd>

namespace km {

inline constexpr int kSchemaVersion = 1;

// Exit codes: 0 success, 1 failed verification, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace km
