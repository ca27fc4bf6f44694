#include "endocost/environments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "endocost/error.hpp"

namespace endocost {

std::string_view to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::Stationary: return "stationary";
    case EnvironmentKind::Alternating: return "alternating";
    case EnvironmentKind::BoundedDrift: return "bounded_drift";
    case EnvironmentKind::InteractionDominant: return "interaction_dominant";
  }
  return "unknown";
}

EnvironmentKind environment_kind_from_string(std::string_view name) {
  if (name == "stationary") return EnvironmentKind::Stationary;
  if (name == "alternating") return EnvironmentKind::Alternating;
  if (name == "bounded_drift") return EnvironmentKind::BoundedDrift;
  if (name == "interaction_dominant") return EnvironmentKind::InteractionDominant;
  throw Error(ErrorKind::InvalidArgument, "unknown environment '" + std::string(name) + "'");
}

void EnvironmentSpec::validate() const {
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "environment horizon must be >= 1");
  if (n < 2) throw Error(ErrorKind::InvalidSize, "environment needs n >= 2");
  if (phase_length && *phase_length == 0) throw Error(ErrorKind::InvalidArgument, "phase length must be >= 1");
  if (!(variation_budget >= 0.0)) throw Error(ErrorKind::InvalidArgument, "variation budget must be >= 0");
  if (!(noise_amplitude >= 0.0 && noise_amplitude <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "noise amplitude must lie in [0, 1/2]");
  }
  if (!(value_low >= 0.0 && value_low <= value_high && value_high <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "value range must satisfy 0 <= low <= high <= 1");
  }
}

std::size_t EnvironmentSpec::effective_phase_length() const noexcept {
  if (phase_length) return *phase_length;
  return std::max<std::size_t>(1, horizon / 2);
}

void VariationTracker::track(const ValueVector& previous, const ValueVector& current) {
  if (previous.size() != current.size()) {
    throw Error(ErrorKind::DimensionMismatch, "variation tracker: length mismatch");
  }
  total_ += (current.values() - previous.values()).lpNorm<Eigen::Infinity>();
}

Environment::Environment(EnvironmentSpec spec) : spec_(spec), rng_(spec.seed) {
  spec_.validate();
  if (spec_.kind == EnvironmentKind::Stationary) stationary_ = draw_uniform_box();
}

Eigen::VectorXd Environment::draw_uniform_box() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(spec_.n));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = spec_.value_low + (spec_.value_high - spec_.value_low) * unit(rng_);
  }
  return v;
}

ValueVector Environment::next_value(std::size_t t) {
  if (t < 1 || t > spec_.horizon) {
    throw Error(ErrorKind::OutOfRange, "round " + std::to_string(t) + " outside [1, " +
                                           std::to_string(spec_.horizon) + "]");
  }
  if (t != last_round_ + 1) {
    throw Error(ErrorKind::OutOfRange, "rounds must be requested in order; expected " +
                                           std::to_string(last_round_ + 1) + ", got " + std::to_string(t));
  }
  const auto n = static_cast<Eigen::Index>(spec_.n);
  Eigen::VectorXd v;
  switch (spec_.kind) {
    case EnvironmentKind::Stationary:
      v = stationary_;
      break;
    case EnvironmentKind::Alternating: {
      const std::size_t phase = (t - 1) / spec_.effective_phase_length();
      v = Eigen::VectorXd::Zero(n);
      v[phase % 2 == 0 ? 0 : 1] = 1.0;
      break;
    }
    case EnvironmentKind::BoundedDrift: {
      if (!previous_) {
        v = draw_uniform_box();
        break;
      }
      // ||drift * zeta||_inf <= drift, and clamping only shrinks steps, so V_T <= V.
      const double drift = spec_.horizon > 1 ? spec_.variation_budget / static_cast<double>(spec_.horizon - 1) : 0.0;
      std::uniform_real_distribution<double> sym(-1.0, 1.0);
      v = previous_->values();
      for (Eigen::Index i = 0; i < n; ++i) v[i] = std::clamp(v[i] + drift * sym(rng_), 0.0, 1.0);
      break;
    }
    case EnvironmentKind::InteractionDominant: {
      std::bernoulli_distribution coin(0.5);
      v.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = 0.5 + spec_.noise_amplitude * (coin(rng_) ? 1.0 : -1.0);
      break;
    }
  }
  ValueVector value(std::move(v));
  if (previous_) tracker_.track(*previous_, value);
  previous_ = value;
  last_round_ = t;
  return value;
}

}  // namespace endocost
