#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace invbq {

/// Diagonal of a +-1 matrix: an axis flip, a point symmetry, or a mix.
class SignVector {
 public:
  SignVector() = default;
  /// Throws InvalidInput if any entry is not exactly -1 or +1.
  explicit SignVector(std::vector<int> signs);

  static SignVector identity(std::size_t dim);

  std::size_t dim() const noexcept { return signs_.size(); }
  int operator[](std::size_t q) const noexcept { return signs_[q]; }
  std::span<const int> signs() const noexcept { return signs_; }
  bool is_identity() const noexcept;

  /// Canonical order: lexicographic with +1 sorting before -1, so the
  /// identity is always the smallest element.
  std::strong_ordering operator<=>(const SignVector& other) const noexcept;
  bool operator==(const SignVector& other) const noexcept = default;

 private:
  std::vector<int> signs_;
};

/// Elementwise product; represents Q_a^T Q_b for diagonal +-1 matrices.
SignVector compose(const SignVector& a, const SignVector& b);

/// signs (.) x
Eigen::VectorXd apply(const SignVector& element, const Eigen::VectorXd& x);

/// |det(diag(c))|. Always 1 for sign vectors; kept as an explicit factor in
/// the change-of-variables formula for the transformed prior variance.
double abs_det(const SignVector& element) noexcept;

/// Finite group of diagonal sign-flip transforms, closed under composition.
/// Immutable after construction.
class SignFlipGroup {
 public:
  SignFlipGroup() = default;

  /// Closure of {identity} U generators under elementwise product, sorted
  /// canonically. Throws InvalidInput on a dimension mismatch or dim == 0.
  static SignFlipGroup from_generators(const std::vector<SignVector>& generators,
                                       std::size_t dim);
  static SignFlipGroup trivial(std::size_t dim);
  /// {I, -I}
  static SignFlipGroup point_symmetry(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const SignVector& element(std::size_t i) const;
  const std::vector<SignVector>& elements() const noexcept { return elements_; }

  /// Index of compose(element(i), element(j)); O(1) table lookup.
  std::size_t compose_index(std::size_t i, std::size_t j) const;
  /// Index of an element; throws InvalidInput if it is not in the group.
  std::size_t index_of(const SignVector& element) const;

  /// The J images of x, one per element (a multiset: fixed points repeat).
  std::vector<Eigen::VectorXd> orbit(const Eigen::VectorXd& x) const;

  bool operator==(const SignFlipGroup& other) const noexcept {
    return dim_ == other.dim_ && elements_ == other.elements_;
  }

 private:
  SignFlipGroup(std::size_t dim, std::vector<SignVector> elements);

  std::size_t dim_ = 0;
  std::vector<SignVector> elements_;
  std::vector<std::size_t> compose_table_;  // row-major J x J
};

}  // namespace invbq
