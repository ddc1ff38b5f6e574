#include "invbq/symmetry_group.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "invbq/errors.hpp"

namespace invbq {

SignVector::SignVector(std::vector<int> signs) : signs_(std::move(signs)) {
  for (int s : signs_) {
    if (s != 1 && s != -1) {
      throw InvalidInput("sign vector entries must be -1 or +1, got " + std::to_string(s));
    }
  }
}

SignVector SignVector::identity(std::size_t dim) {
  return SignVector(std::vector<int>(dim, 1));
}

bool SignVector::is_identity() const noexcept {
  return std::all_of(signs_.begin(), signs_.end(), [](int s) { return s == 1; });
}

std::strong_ordering SignVector::operator<=>(const SignVector& other) const noexcept {
  // +1 before -1: compare negated entries.
  const std::size_t n = std::min(signs_.size(), other.signs_.size());
  for (std::size_t q = 0; q < n; ++q) {
    if (signs_[q] != other.signs_[q]) {
      return (-signs_[q]) <=> (-other.signs_[q]);
    }
  }
  return signs_.size() <=> other.signs_.size();
}

SignVector compose(const SignVector& a, const SignVector& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("compose: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()) + ")");
  }
  std::vector<int> out(a.dim());
  for (std::size_t q = 0; q < a.dim(); ++q) out[q] = a[q] * b[q];
  return SignVector(std::move(out));
}

Eigen::VectorXd apply(const SignVector& element, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != element.dim()) {
    throw InvalidInput("apply: point has dimension " + std::to_string(x.size()) +
                       ", group element has " + std::to_string(element.dim()));
  }
  Eigen::VectorXd out(x.size());
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    out[q] = element[static_cast<std::size_t>(q)] < 0 ? -x[q] : x[q];
  }
  return out;
}

double abs_det(const SignVector& element) noexcept {
  int det = 1;
  for (int s : element.signs()) det *= s;
  return det < 0 ? -static_cast<double>(det) : static_cast<double>(det);
}

SignFlipGroup::SignFlipGroup(std::size_t dim, std::vector<SignVector> elements)
    : dim_(dim), elements_(std::move(elements)) {
  const std::size_t j = elements_.size();
  compose_table_.resize(j * j);
  for (std::size_t a = 0; a < j; ++a) {
    for (std::size_t b = 0; b < j; ++b) {
      compose_table_[a * j + b] = index_of(compose(elements_[a], elements_[b]));
    }
  }
}

SignFlipGroup SignFlipGroup::from_generators(const std::vector<SignVector>& generators,
                                             std::size_t dim) {
  if (dim == 0) throw InvalidInput("group dimension must be positive");
  for (const auto& g : generators) {
    if (g.dim() != dim) {
      throw InvalidInput("generator has dimension " + std::to_string(g.dim()) +
                         ", expected " + std::to_string(dim));
    }
  }
  std::set<SignVector> closure{SignVector::identity(dim)};
  std::vector<SignVector> frontier{SignVector::identity(dim)};
  while (!frontier.empty()) {
    std::vector<SignVector> next;
    for (const auto& e : frontier) {
      for (const auto& g : generators) {
        auto p = compose(e, g);
        if (closure.insert(p).second) next.push_back(std::move(p));
      }
    }
    frontier = std::move(next);
  }
  return SignFlipGroup(dim, std::vector<SignVector>(closure.begin(), closure.end()));
}

SignFlipGroup SignFlipGroup::trivial(std::size_t dim) { return from_generators({}, dim); }

SignFlipGroup SignFlipGroup::point_symmetry(std::size_t dim) {
  return from_generators({SignVector(std::vector<int>(dim, -1))}, dim);
}

const SignVector& SignFlipGroup::element(std::size_t i) const {
  if (i >= elements_.size()) {
    throw InvalidInput("group element index " + std::to_string(i) + " out of range (J=" +
                       std::to_string(elements_.size()) + ")");
  }
  return elements_[i];
}

std::size_t SignFlipGroup::compose_index(std::size_t i, std::size_t j) const {
  const std::size_t n = elements_.size();
  if (i >= n || j >= n) throw InvalidInput("group element index out of range");
  return compose_table_[i * n + j];
}

std::size_t SignFlipGroup::index_of(const SignVector& element) const {
  auto it = std::lower_bound(elements_.begin(), elements_.end(), element);
  if (it == elements_.end() || !(*it == element)) {
    throw InvalidInput("sign vector is not an element of the group");
  }
  return static_cast<std::size_t>(it - elements_.begin());
}

std::vector<Eigen::VectorXd> SignFlipGroup::orbit(const Eigen::VectorXd& x) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(elements_.size());
  for (const auto& g : elements_) out.push_back(apply(g, x));
  return out;
}

}  // namespace invbq
