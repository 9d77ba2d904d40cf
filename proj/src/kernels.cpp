#include "km/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace km::kernels {

const Table& active() {
  static const Table& chosen = [] () -> const Table& {
    const char* env = std::getenv("KM_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar();
    if (const Table* t = avx2()) return *t;
    return scalar();
  }();
  return chosen;
}

}  // namespace km::kernels
