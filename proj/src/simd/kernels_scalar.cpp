#include <cmath>

#include "invbq/simd/kernels.hpp"

namespace invbq::simd::scalar {

void exp(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

void sqexp_sum(const double* points, std::size_t n_points, std::size_t dim,
               const double* centers, std::size_t n_centers, double scale, double* out) {
  for (std::size_t i = 0; i < n_points; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < n_centers; ++c) {
      double r2 = 0.0;
      for (std::size_t q = 0; q < dim; ++q) {
        const double diff = points[q * n_points + i] - centers[c * dim + q];
        r2 += diff * diff;
      }
      sum += std::exp(scale * r2);
    }
    out[i] = sum;
  }
}

}  // namespace invbq::simd::scalar
