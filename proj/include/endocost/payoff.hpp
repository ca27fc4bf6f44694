#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "endocost/error.hpp"
#include "endocost/graph.hpp"
#include "endocost/simplex.hpp"

namespace endocost {

// Paper: r_i = v_i + lambda * sum over out-edges (i, j) of W_ij a_j.
// ExactGradient: r_i = dP/da_i = v_i + lambda * sum_j (W_ij + W_ji) a_j.
enum class RewardMode { Paper, ExactGradient };

std::string_view to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view name);

struct RewardVector {
  Eigen::VectorXd rewards;
  RewardMode mode = RewardMode::Paper;
};

namespace detail {

template <typename DA, typename DV>
void check_dimensions(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& v,
                      const InteractionGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  if (a.size() != n || v.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "expected vectors of length " + std::to_string(n) + ", got a=" + std::to_string(a.size()) +
                    " v=" + std::to_string(v.size()));
  }
}

// sum_j W_ij a_j over out-edges, in sorted edge order.
template <typename DA>
Eigen::VectorXd out_interaction(const Eigen::MatrixBase<DA>& a, const InteractionGraph& g) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.n()));
  for (const Edge& e : g.edges()) {
    s[static_cast<Eigen::Index>(e.from)] += e.weight * a[static_cast<Eigen::Index>(e.to)];
  }
  return s;
}

}  // namespace detail

/// P(a, v; W) = sum_i a_i v_i + lambda * sum_{(i,j) in E} W_ij a_i a_j.
///
/// Accepts any Eigen vector expression, including points off the simplex
/// (finite-difference probes rely on this). Edges are summed in sorted order.
template <typename DA, typename DV>
double payoff(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& v, const InteractionGraph& g) {
  detail::check_dimensions(a, v, g);
  double direct = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) direct += a[i] * v[i];
  double interaction = 0.0;
  for (const Edge& e : g.edges()) {
    interaction += e.weight * a[static_cast<Eigen::Index>(e.from)] * a[static_cast<Eigen::Index>(e.to)];
  }
  return direct + g.lambda() * interaction;
}

inline double payoff(const Allocation& a, const ValueVector& v, const InteractionGraph& g) {
  return payoff(a.weights(), v.values(), g);
}

template <typename DA, typename DV>
Eigen::VectorXd reward_values(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& v,
                              const InteractionGraph& g, RewardMode mode) {
  detail::check_dimensions(a, v, g);
  Eigen::VectorXd s = detail::out_interaction(a, g);
  if (mode == RewardMode::ExactGradient) {
    for (const Edge& e : g.edges()) {
      s[static_cast<Eigen::Index>(e.to)] += e.weight * a[static_cast<Eigen::Index>(e.from)];
    }
  }
  return v + g.lambda() * s;
}

inline RewardVector reward(const Allocation& a, const ValueVector& v, const InteractionGraph& g,
                           RewardMode mode = RewardMode::Paper) {
  return RewardVector{reward_values(a.weights(), v.values(), g, mode), mode};
}

// c_i = -v_i - lambda * sum_j W_ij a_j (out-edge convention).
template <typename DA, typename DV>
Eigen::VectorXd endogenous_cost(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DV>& v,
                                const InteractionGraph& g) {
  return -reward_values(a, v, g, RewardMode::Paper);
}

inline Eigen::VectorXd endogenous_cost(const Allocation& a, const ValueVector& v, const InteractionGraph& g) {
  return endogenous_cost(a.weights(), v.values(), g);
}

}  // namespace endocost
