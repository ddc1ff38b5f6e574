#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and, where
// the target supports it, an AVX2+FMA variant. Callers go through
// invbq::simd::dispatch (dispatch.hpp); the per-ISA entry points are exposed
// so the equivalence tests can call both sides directly.

#include <cstddef>

namespace invbq::simd {

/// out[i] = exp(in[i]) for i < n.
using ExpFn = void (*)(const double* in, double* out, std::size_t n);

/// Squared-exponential sum over a set of centres:
///   out[i] = sum_{c < n_centers} exp(scale * ||p_i - center_c||^2)
/// `points` is column-major n_points x dim (coordinate q of point i at
/// points[q * n_points + i]); `centers` is row-major n_centers x dim.
/// `scale` is -1 / (2 lambda^2) for an RBF kernel.
using SqExpSumFn = void (*)(const double* points, std::size_t n_points, std::size_t dim,
                            const double* centers, std::size_t n_centers, double scale,
                            double* out);

namespace scalar {
void exp(const double* in, double* out, std::size_t n);
void sqexp_sum(const double* points, std::size_t n_points, std::size_t dim,
               const double* centers, std::size_t n_centers, double scale, double* out);
}  // namespace scalar

#if defined(INVBQ_HAVE_AVX2)
namespace avx2 {
void exp(const double* in, double* out, std::size_t n);
void sqexp_sum(const double* points, std::size_t n_points, std::size_t dim,
               const double* centers, std::size_t n_centers, double scale, double* out);
}  // namespace avx2
#endif

}  // namespace invbq::simd
