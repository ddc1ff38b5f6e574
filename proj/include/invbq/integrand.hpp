#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "invbq/symmetry_group.hpp"

namespace invbq {

/// A scalar function on R^d together with the sign-flip invariances it is
/// known to have.
struct Integrand {
  std::function<double(const Eigen::VectorXd&)> evaluate;
  std::size_t dim = 0;
  SignFlipGroup declared_group;
};

}  // namespace invbq
