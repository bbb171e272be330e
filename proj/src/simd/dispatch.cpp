#include <atomic>
#include <cstdlib>
#include <cstring>

#include "rkbs/simd/dense.hpp"

namespace rkbs::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa probe() {
  if (const char* env = std::getenv("RKBS_FORCE_SCALAR"); env && std::strcmp(env, "0") != 0) {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{probe()};
  return isa;
}

}  // namespace

Isa detected_isa() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) isa = Isa::Scalar;
  return active().exchange(isa);
}

void dense_layer(const DenseArgs& args) {
#if defined(__x86_64__) || defined(_M_X64)
  if (active_isa() == Isa::Avx2) {
    avx2::dense_layer(args);
    return;
  }
#endif
  ref::dense_layer(args);
}

}  // namespace rkbs::simd
