#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace endocost::detail {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

class CompensatedVectorSum {
 public:
  explicit CompensatedVectorSum(Eigen::Index n)
      : sum_(Eigen::VectorXd::Zero(n)), compensation_(Eigen::VectorXd::Zero(n)) {}

  void add(const Eigen::VectorXd& x) noexcept {
    for (Eigen::Index i = 0; i < sum_.size(); ++i) {
      const double t = sum_[i] + x[i];
      if (std::abs(sum_[i]) >= std::abs(x[i])) {
        compensation_[i] += (sum_[i] - t) + x[i];
      } else {
        compensation_[i] += (x[i] - t) + sum_[i];
      }
      sum_[i] = t;
    }
  }
  Eigen::VectorXd value() const { return sum_ + compensation_; }

 private:
  Eigen::VectorXd sum_;
  Eigen::VectorXd compensation_;
};

}  // namespace endocost::detail
