#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <string_view>

#include <Eigen/Dense>

#include "endocost/graph.hpp"
#include "endocost/payoff.hpp"
#include "endocost/simplex.hpp"

namespace endocost {

enum class AllocatorKind { Uniform, Gated, Competitive };
enum class FeatureScheme { NoisyValue, Uninformative };

std::string_view to_string(AllocatorKind kind);
AllocatorKind allocator_kind_from_string(std::string_view name);
std::string_view to_string(FeatureScheme scheme);

// Smallest weight MWU keeps; exact underflow to zero would be absorbing.
inline constexpr double kMwuWeightFloor = 1e-300;

struct Feedback {
  ValueVector values;
  RewardVector rewards;
  double payoff = 0.0;
  std::optional<Eigen::VectorXd> features;
};

struct GatedParams {
  double base_step = 1.0;
  double step_exponent = -1.0 / 3.0;
  // The gate differentiates P through this reward definition.
  RewardMode gradient_mode = RewardMode::Paper;
};

struct CompetitiveParams {
  // Unset means sqrt(ln N / T).
  std::optional<double> learning_rate;
  // eta_t = sqrt(ln N / t) instead of the fixed-horizon rate.
  bool anytime = false;
};

double default_learning_rate(std::size_t n, std::size_t horizon);

/// Common driver interface: allocate for the current round, then observe
/// that round's feedback.
class Allocator {
 public:
  virtual ~Allocator() = default;

  virtual AllocatorKind kind() const = 0;
  // `features` is required by the gated allocator and ignored by the others.
  virtual const Allocation& allocate(const Eigen::VectorXd* features) = 0;
  virtual void observe(const Feedback& feedback, const InteractionGraph& g) = 0;

  // 1-based index of the round about to be played.
  std::size_t round() const noexcept { return round_; }

 protected:
  std::size_t round_ = 1;
};

class UniformAllocator final : public Allocator {
 public:
  explicit UniformAllocator(std::size_t n);

  AllocatorKind kind() const override { return AllocatorKind::Uniform; }
  const Allocation& allocate(const Eigen::VectorXd* features) override;
  void observe(const Feedback& feedback, const InteractionGraph& g) override;

 private:
  Allocation allocation_;
};

class GatedAllocator final : public Allocator {
 public:
  GatedAllocator(std::size_t n, std::size_t feature_dim, GatedParams params = {});

  AllocatorKind kind() const override { return AllocatorKind::Gated; }
  const Allocation& allocate(const Eigen::VectorXd* features) override;
  void observe(const Feedback& feedback, const InteractionGraph& g) override;

  const Eigen::MatrixXd& gating_matrix() const noexcept { return gate_; }
  void set_gating_matrix(Eigen::MatrixXd gate);
  double step_size(std::size_t t) const;

 private:
  GatedParams params_;
  Eigen::MatrixXd gate_;
  Allocation allocation_;
  Eigen::VectorXd last_features_;
};

class CompetitiveAllocator final : public Allocator {
 public:
  CompetitiveAllocator(std::size_t n, std::size_t horizon, CompetitiveParams params = {});

  AllocatorKind kind() const override { return AllocatorKind::Competitive; }
  const Allocation& allocate(const Eigen::VectorXd* features) override;
  void observe(const Feedback& feedback, const InteractionGraph& g) override;

  double learning_rate() const noexcept { return eta_; }
  double learning_rate_at(std::size_t t) const;

 private:
  CompetitiveParams params_;
  std::size_t n_;
  double eta_;
  Allocation allocation_;
};

// J^T u for the softmax Jacobian J_ik = a_i (delta_ik - a_k).
Eigen::VectorXd softmax_vjp(const Eigen::VectorXd& a, const Eigen::VectorXd& u);

// Gradient of P(softmax(G x)) with respect to G: (J^T u) x^T.
Eigen::MatrixXd gating_gradient(const Eigen::VectorXd& a, const Eigen::VectorXd& u, const Eigen::VectorXd& x);

/// a_{t+1,i} = a_{t,i} exp(eta r_i) / Z with the maximum reward subtracted
/// before exponentiation. Weights that underflow to zero are floored at
/// kMwuWeightFloor; an input weight that is already zero stays zero.
Allocation competitive_update(const Allocation& a, const Eigen::VectorXd& rewards, double eta);

Eigen::VectorXd make_features(const ValueVector& v, FeatureScheme scheme, double sigma, std::mt19937_64& rng);

}  // namespace endocost
