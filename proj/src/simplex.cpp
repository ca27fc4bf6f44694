#include "endocost/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "endocost/error.hpp"

namespace endocost {

Allocation::Allocation(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) {
    throw Error(ErrorKind::InvalidSize, "allocation must have at least one entry");
  }
  if (!weights_.allFinite()) {
    throw Error(ErrorKind::NonFinite, "allocation has non-finite entries");
  }
  if ((weights_.array() < 0.0).any()) {
    throw Error(ErrorKind::NotOnSimplex, "allocation has negative entries");
  }
  const double total = weights_.sum();
  const double slack = std::abs(total - 1.0);
  if (slack > kRenormalizeLimit) {
    throw Error(ErrorKind::NotOnSimplex,
                "allocation sums to " + std::to_string(total) + ", not 1");
  }
  if (slack > kSimplexTolerance) weights_ /= total;
}

Allocation Allocation::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidSize, "uniform allocation needs n >= 1");
  return Allocation(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Allocation Allocation::vertex(std::size_t n, std::size_t k) {
  if (k >= n) throw Error(ErrorKind::OutOfRange, "vertex index out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  w[static_cast<Eigen::Index>(k)] = 1.0;
  return Allocation(std::move(w));
}

ValueVector::ValueVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) {
    throw Error(ErrorKind::InvalidSize, "value vector must have at least one entry");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorKind::NonFinite, "value vector has non-finite entries");
  }
  if ((values_.array() < 0.0).any() || (values_.array() > 1.0).any()) {
    throw Error(ErrorKind::OutOfRange, "values must lie in [0, 1]");
  }
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double threshold = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    running += sorted[static_cast<std::size_t>(k)];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) threshold = candidate;
  }
  Eigen::VectorXd x = (y.array() - threshold).cwiseMax(0.0).matrix();
  // Guard against accumulated rounding in the threshold.
  const double total = x.sum();
  if (total > 0.0) x /= total;
  return x;
}

}  // namespace endocost
