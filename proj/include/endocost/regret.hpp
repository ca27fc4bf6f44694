#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "endocost/graph.hpp"
#include "endocost/payoff.hpp"
#include "endocost/simplex.hpp"

namespace endocost {

/// Complete record of one run: a_t, v_t, r(t) and P(a_t, v_t) per round.
struct RunTrace {
  std::size_t horizon = 0;
  std::vector<Allocation> allocations;
  std::vector<ValueVector> values;
  std::vector<RewardVector> rewards;
  std::vector<double> payoffs;

  bool complete() const noexcept {
    return horizon > 0 && allocations.size() == horizon && values.size() == horizon &&
           rewards.size() == horizon && payoffs.size() == horizon;
  }
};

// Compensated sum of the recorded per-round payoffs.
double total_payoff(const RunTrace& trace);

struct QPOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

struct QPSolution {
  Allocation allocation;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

struct KktReport {
  // L * ||a - proj(a + grad / L)||_2, zero exactly at KKT points.
  double gradient_mapping_norm = 0.0;
  // max - min of dP/da_i over coordinates with a_i > kActiveThreshold.
  double active_spread = 0.0;
};

inline constexpr double kActiveThreshold = 1e-8;

/// max over the simplex of  l . a + lambda * sum_{(i,j) in E} W_ij a_i a_j.
///
/// The interaction form is indefinite in general, even under the bounded
/// coupling assumption, so the solver runs projected gradient ascent (step
/// 1/L) from the uniform point, every vertex, and an optional warm start,
/// and keeps the best stationary point. Every few hundred iterations it
/// tries to jump to the exact stationary point of the current face.
class SimplexQP {
 public:
  SimplexQP(Eigen::VectorXd linear, const InteractionGraph& g, QPOptions options = {});

  double objective(const Eigen::VectorXd& a) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& a) const;
  double lipschitz() const noexcept { return lipschitz_; }
  double gradient_mapping_norm(const Eigen::VectorXd& a) const;

  QPSolution solve(const std::optional<Eigen::VectorXd>& warm_start = std::nullopt) const;

 private:
  std::optional<QPSolution> ascend(Eigen::VectorXd a, Eigen::VectorXd& last, double& last_norm) const;
  std::optional<Eigen::VectorXd> face_stationary_point(const Eigen::VectorXd& a) const;

  Eigen::VectorXd linear_;
  const InteractionGraph& graph_;
  QPOptions options_;
  Eigen::MatrixXd hessian_;
  double lipschitz_;
};

KktReport kkt_report(const Eigen::VectorXd& a, const Eigen::VectorXd& linear, const InteractionGraph& g);

Eigen::VectorXd mean_values(std::span<const ValueVector> values);

// The sum over rounds of P(a, v_t) equals T * P(a, mean v), so one QP suffices.
QPSolution best_fixed(std::span<const ValueVector> values, const InteractionGraph& g, QPOptions options = {});
QPSolution per_round_opt(const ValueVector& v, const InteractionGraph& g, QPOptions options = {},
                         const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

double static_regret(const RunTrace& trace, const InteractionGraph& g, QPOptions options = {});
double dynamic_regret(const RunTrace& trace, const InteractionGraph& g, QPOptions options = {});

struct TruthfulnessGap {
  // (1/T') sum_t sum_i |a_ti - mu_i(t) / sum_j mu_j(t)|
  double aggregate = 0.0;
  // max_i (1/T') sum_t |a_ti - mu_i(t) / sum_j mu_j(t)|
  double worst_module = 0.0;
  std::vector<double> per_round;
};

// Marginal contributions mu(t) are the paper-mode rewards at (a_t, v_t).
// Throws NonPositiveTotal naming the round if sum_j mu_j(t) <= 0.
TruthfulnessGap truthfulness_gap(const RunTrace& trace, const InteractionGraph& g,
                                 std::optional<std::size_t> window = std::nullopt);

struct RegretLedger {
  double allocator_payoff = 0.0;
  double best_fixed_payoff = 0.0;
  double per_round_opt_payoff = 0.0;
  double static_regret = 0.0;
  double dynamic_regret = 0.0;
  Allocation best_fixed_allocation = Allocation::uniform(1);
  std::optional<TruthfulnessGap> truthfulness;
};

RegretLedger settle(const RunTrace& trace, const InteractionGraph& g, QPOptions options = {});

}  // namespace endocost
