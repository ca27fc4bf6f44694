#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "endocost/allocators.hpp"
#include "endocost/simplex.hpp"

namespace endocost {

enum class EnvironmentKind { Stationary, Alternating, BoundedDrift, InteractionDominant };

std::string_view to_string(EnvironmentKind kind);
EnvironmentKind environment_kind_from_string(std::string_view name);

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::Stationary;
  std::size_t horizon = 1;
  std::size_t n = 2;
  std::uint64_t seed = 0;
  // Alternating: rounds per phase; unset means T/2.
  std::optional<std::size_t> phase_length;
  // Bounded drift: total sup-norm variation budget V; per-step drift V/(T-1).
  double variation_budget = 1.0;
  // Interaction-dominant: perturbation amplitude delta <= 1/2.
  double noise_amplitude = 0.25;
  // Stationary and the bounded-drift starting point draw from U[low, high]^N.
  double value_low = 0.0;
  double value_high = 1.0;

  void validate() const;
  // Interaction-dominant pairs with features that carry no value signal.
  FeatureScheme feature_scheme() const noexcept {
    return kind == EnvironmentKind::InteractionDominant ? FeatureScheme::Uninformative
                                                        : FeatureScheme::NoisyValue;
  }
  std::size_t effective_phase_length() const noexcept;
};

/// Running V_t = sum_{s=2..t} ||v_s - v_{s-1}||_inf.
class VariationTracker {
 public:
  void track(const ValueVector& previous, const ValueVector& current);
  double total() const noexcept { return total_; }

 private:
  double total_ = 0.0;
};

/// Deterministic value-sequence generator owned by a single run.
class Environment {
 public:
  explicit Environment(EnvironmentSpec spec);

  // Rounds are 1-based and must be requested in order 1, 2, ..., T.
  ValueVector next_value(std::size_t t);

  const EnvironmentSpec& spec() const noexcept { return spec_; }
  const VariationTracker& variation() const noexcept { return tracker_; }

 private:
  Eigen::VectorXd draw_uniform_box();

  EnvironmentSpec spec_;
  std::mt19937_64 rng_;
  std::size_t last_round_ = 0;
  std::optional<ValueVector> previous_;
  Eigen::VectorXd stationary_;
  VariationTracker tracker_;
};

}  // namespace endocost
