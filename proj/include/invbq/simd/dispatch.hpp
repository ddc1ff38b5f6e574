#pragma once

#include <span>
#include <string_view>

#include "invbq/simd/kernels.hpp"

namespace invbq::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True if the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

/// The ISA currently used by the dispatching entry points. Chosen on first
/// use: the best available one, unless INVBQ_SIMD=scalar is set.
Isa active_isa() noexcept;

/// Overrides the automatic choice (tests, benchmarks). Returns false and
/// leaves the selection untouched if `isa` is not available.
bool set_isa(Isa isa) noexcept;

struct KernelTable {
  ExpFn exp;
  SqExpSumFn sqexp_sum;
};

const KernelTable& kernels(Isa isa) noexcept;
const KernelTable& kernels() noexcept;

inline void exp(std::span<const double> in, std::span<double> out) {
  kernels().exp(in.data(), out.data(), in.size());
}

}  // namespace invbq::simd
