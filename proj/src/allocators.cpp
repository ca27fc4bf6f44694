#include "endocost/allocators.hpp"

#include <cmath>
#include <string>

#include "endocost/error.hpp"

namespace endocost {

std::string_view to_string(AllocatorKind kind) {
  switch (kind) {
    case AllocatorKind::Uniform: return "uniform";
    case AllocatorKind::Gated: return "gated";
    case AllocatorKind::Competitive: return "competitive";
  }
  return "unknown";
}

AllocatorKind allocator_kind_from_string(std::string_view name) {
  if (name == "uniform") return AllocatorKind::Uniform;
  if (name == "gated") return AllocatorKind::Gated;
  if (name == "competitive") return AllocatorKind::Competitive;
  throw Error(ErrorKind::InvalidArgument, "unknown allocator '" + std::string(name) + "'");
}

std::string_view to_string(FeatureScheme scheme) {
  return scheme == FeatureScheme::NoisyValue ? "noisy_value" : "uninformative";
}

double default_learning_rate(std::size_t n, std::size_t horizon) {
  if (n < 2 || horizon == 0) throw Error(ErrorKind::InvalidArgument, "learning rate needs n >= 2 and T >= 1");
  return std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(horizon));
}

UniformAllocator::UniformAllocator(std::size_t n) : allocation_(Allocation::uniform(n)) {}

const Allocation& UniformAllocator::allocate(const Eigen::VectorXd*) { return allocation_; }

void UniformAllocator::observe(const Feedback&, const InteractionGraph&) { ++round_; }

GatedAllocator::GatedAllocator(std::size_t n, std::size_t feature_dim, GatedParams params)
    : params_(params),
      gate_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim))),
      allocation_(Allocation::uniform(n)) {
  if (feature_dim == 0) throw Error(ErrorKind::InvalidSize, "gated allocator needs feature dimension >= 1");
  if (!(params_.base_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "gated base step must be > 0");
}

void GatedAllocator::set_gating_matrix(Eigen::MatrixXd gate) {
  if (gate.rows() != gate_.rows() || gate.cols() != gate_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "gating matrix shape mismatch");
  }
  gate_ = std::move(gate);
}

double GatedAllocator::step_size(std::size_t t) const {
  return params_.base_step * std::pow(static_cast<double>(t), params_.step_exponent);
}

const Allocation& GatedAllocator::allocate(const Eigen::VectorXd* features) {
  if (features == nullptr) throw Error(ErrorKind::InvalidArgument, "gated allocator requires a feature vector");
  if (features->size() != gate_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "feature vector length does not match gating matrix");
  }
  last_features_ = *features;
  allocation_ = Allocation(softmax(gate_ * last_features_));
  return allocation_;
}

void GatedAllocator::observe(const Feedback& feedback, const InteractionGraph& g) {
  if (last_features_.size() == 0) throw Error(ErrorKind::InvalidArgument, "gated allocator observed before allocating");
  // Marginal payoffs at the allocation the gate just produced.
  const Eigen::VectorXd u =
      reward_values(allocation_.weights(), feedback.values.values(), g, params_.gradient_mode);
  gate_ += step_size(round_) * gating_gradient(allocation_.weights(), u, last_features_);
  ++round_;
}

CompetitiveAllocator::CompetitiveAllocator(std::size_t n, std::size_t horizon, CompetitiveParams params)
    : params_(params),
      n_(n),
      eta_(params.learning_rate ? *params.learning_rate : default_learning_rate(n, horizon)),
      allocation_(Allocation::uniform(n)) {
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw Error(ErrorKind::InvalidArgument, "learning rate must be finite and >= 0");
}

double CompetitiveAllocator::learning_rate_at(std::size_t t) const {
  return params_.anytime ? default_learning_rate(n_, t) : eta_;
}

const Allocation& CompetitiveAllocator::allocate(const Eigen::VectorXd*) { return allocation_; }

void CompetitiveAllocator::observe(const Feedback& feedback, const InteractionGraph&) {
  allocation_ = competitive_update(allocation_, feedback.rewards.rewards, learning_rate_at(round_));
  ++round_;
}

Eigen::VectorXd softmax_vjp(const Eigen::VectorXd& a, const Eigen::VectorXd& u) {
  if (a.size() != u.size()) throw Error(ErrorKind::DimensionMismatch, "softmax_vjp: length mismatch");
  return (a.array() * (u.array() - a.dot(u))).matrix();
}

Eigen::MatrixXd gating_gradient(const Eigen::VectorXd& a, const Eigen::VectorXd& u, const Eigen::VectorXd& x) {
  return softmax_vjp(a, u) * x.transpose();
}

Allocation competitive_update(const Allocation& a, const Eigen::VectorXd& rewards, double eta) {
  if (rewards.size() != static_cast<Eigen::Index>(a.size())) {
    throw Error(ErrorKind::DimensionMismatch, "reward vector length does not match allocation");
  }
  if (!rewards.allFinite()) throw Error(ErrorKind::NonFinite, "reward vector has non-finite entries");
  const double shift = rewards.maxCoeff();
  Eigen::VectorXd w(rewards.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double prior = a.weights()[i];
    if (prior == 0.0) {
      w[i] = 0.0;
      continue;
    }
    w[i] = prior * std::exp(eta * (rewards[i] - shift));
    if (w[i] == 0.0) w[i] = kMwuWeightFloor;
  }
  return Allocation(w / w.sum());
}

Eigen::VectorXd make_features(const ValueVector& v, FeatureScheme scheme, double sigma, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::VectorXd x(n);
  if (scheme == FeatureScheme::Uninformative) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = unit(rng);
    return x;
  }
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "feature noise must be >= 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = std::clamp(v.values()[i] + sigma * gauss(rng), 0.0, 1.0);
  }
  return x;
}

}  // namespace endocost
