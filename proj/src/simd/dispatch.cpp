#include "invbq/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace invbq::simd {
namespace {

constexpr KernelTable kScalar{&scalar::exp, &scalar::sqexp_sum};
#if defined(INVBQ_HAVE_AVX2)
constexpr KernelTable kAvx2{&avx2::exp, &avx2::sqexp_sum};
#endif

bool cpu_has_avx2() noexcept {
#if defined(INVBQ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("INVBQ_SIMD"); env && std::string_view(env) == "scalar") {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
      break;
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  return isa == Isa::scalar || cpu_has_avx2();
}

Isa active_isa() noexcept { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

bool set_isa(Isa isa) noexcept {
  if (!isa_available(isa)) return false;
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
  return true;
}

const KernelTable& kernels(Isa isa) noexcept {
#if defined(INVBQ_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

const KernelTable& kernels() noexcept { return kernels(active_isa()); }

}  // namespace invbq::simd
