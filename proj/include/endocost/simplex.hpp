#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace endocost {

// Sum-to-one slack accepted silently; beyond this and up to kRenormalizeLimit
// the weights are rescaled, past that construction fails.
inline constexpr double kSimplexTolerance = 1e-12;
inline constexpr double kRenormalizeLimit = 1e-9;

/// A point on the probability simplex: nonnegative weights summing to one.
class Allocation {
 public:
  explicit Allocation(Eigen::VectorXd weights);

  static Allocation uniform(std::size_t n);
  static Allocation vertex(std::size_t n, std::size_t k);

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

 private:
  Eigen::VectorXd weights_;
};

/// Intrinsic module values for one round, each in [0, 1].
class ValueVector {
 public:
  explicit ValueVector(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  Eigen::VectorXd values_;
};

// Euclidean projection onto the simplex (sort-and-threshold).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& y);

// Max-subtracted softmax; exact in real arithmetic.
template <typename Derived>
Eigen::VectorXd softmax(const Eigen::MatrixBase<Derived>& z) {
  const double shift = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - shift).exp().matrix();
  return e / e.sum();
}

}  // namespace endocost
