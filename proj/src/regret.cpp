#include "endocost/regret.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

#include "endocost/detail/summation.hpp"
#include "endocost/error.hpp"

namespace endocost {

namespace {

constexpr std::size_t kPolishInterval = 200;

void require_complete(const RunTrace& trace) {
  if (!trace.complete()) {
    throw Error(ErrorKind::IncompleteTrace, "run trace is incomplete: " + std::to_string(trace.payoffs.size()) +
                                                " of " + std::to_string(trace.horizon) + " rounds recorded");
  }
}

struct BitsHash {
  std::size_t operator()(const std::vector<std::uint64_t>& bits) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (std::uint64_t b : bits) h = (h ^ b) * 1099511628211ull;
    return h;
  }
};

std::vector<std::uint64_t> bit_key(const Eigen::VectorXd& v) {
  std::vector<std::uint64_t> key(static_cast<std::size_t>(v.size()));
  std::memcpy(key.data(), v.data(), key.size() * sizeof(double));
  return key;
}

}  // namespace

double total_payoff(const RunTrace& trace) {
  detail::CompensatedSum sum;
  for (double p : trace.payoffs) sum.add(p);
  return sum.value();
}

SimplexQP::SimplexQP(Eigen::VectorXd linear, const InteractionGraph& g, QPOptions options)
    : linear_(std::move(linear)), graph_(g), options_(options) {
  if (linear_.size() != static_cast<Eigen::Index>(g.n())) {
    throw Error(ErrorKind::DimensionMismatch, "QP linear term length does not match graph");
  }
  if (!linear_.allFinite()) throw Error(ErrorKind::NonFinite, "QP linear term is not finite");
  hessian_ = g.lambda() * (g.weights() + g.weights().transpose());
  const double n = static_cast<double>(g.n());
  // 1 + lambda n bounds the curvature under the coupling assumption; the
  // row-sum bound keeps the step valid outside it.
  lipschitz_ = std::max(1.0 + g.lambda() * n, hessian_.cwiseAbs().rowwise().sum().maxCoeff());
}

double SimplexQP::objective(const Eigen::VectorXd& a) const { return payoff(a, linear_, graph_); }

Eigen::VectorXd SimplexQP::gradient(const Eigen::VectorXd& a) const {
  return reward_values(a, linear_, graph_, RewardMode::ExactGradient);
}

double SimplexQP::gradient_mapping_norm(const Eigen::VectorXd& a) const {
  const Eigen::VectorXd next = project_to_simplex(a + gradient(a) / lipschitz_);
  return lipschitz_ * (next - a).norm();
}

std::optional<Eigen::VectorXd> SimplexQP::face_stationary_point(const Eigen::VectorXd& a) const {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] > 0.0) support.push_back(i);
  const auto k = static_cast<Eigen::Index>(support.size());
  if (k < 2) return std::nullopt;

  // [H_SS  -1] [x ]   [-l_S]
  // [1^T    0] [nu] = [ 1  ]
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs(k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) kkt(r, c) = hessian_(support[r], support[c]);
    kkt(r, k) = -1.0;
    kkt(k, r) = 1.0;
    rhs[r] = -linear_[support[r]];
  }
  rhs[k] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::VectorXd sol = lu.solve(rhs);
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(a.size());
  for (Eigen::Index r = 0; r < k; ++r) {
    if (!(sol[r] >= 0.0)) return std::nullopt;
    candidate[support[r]] = sol[r];
  }
  return candidate / candidate.sum();
}

std::optional<QPSolution> SimplexQP::ascend(Eigen::VectorXd a, Eigen::VectorXd& last, double& last_norm) const {
  for (std::size_t it = 0; it <= options_.max_iterations; ++it) {
    const Eigen::VectorXd next = project_to_simplex(a + gradient(a) / lipschitz_);
    const double norm = lipschitz_ * (next - a).norm();
    if (norm <= options_.tolerance) {
      return QPSolution{Allocation(a), objective(a), norm, it};
    }
    a = next;
    if (it > 0 && it % kPolishInterval == 0) {
      if (auto polished = face_stationary_point(a)) {
        const double polished_norm = gradient_mapping_norm(*polished);
        if (polished_norm <= options_.tolerance && objective(*polished) >= objective(a)) {
          return QPSolution{Allocation(*polished), objective(*polished), polished_norm, it};
        }
      }
    }
    last = a;
    last_norm = norm;
  }
  return std::nullopt;
}

QPSolution SimplexQP::solve(const std::optional<Eigen::VectorXd>& warm_start) const {
  const std::size_t n = graph_.n();
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(n + 2);
  if (warm_start) {
    if (warm_start->size() != static_cast<Eigen::Index>(n)) {
      throw Error(ErrorKind::DimensionMismatch, "warm start length does not match graph");
    }
    starts.push_back(project_to_simplex(*warm_start));
  }
  starts.push_back(Allocation::uniform(n).weights());
  for (std::size_t k = 0; k < n; ++k) starts.push_back(Allocation::vertex(n, k).weights());

  std::optional<QPSolution> best;
  Eigen::VectorXd last = starts.front();
  double last_norm = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : starts) {
    auto result = ascend(start, last, last_norm);
    if (result && (!best || result->objective > best->objective)) best = std::move(result);
  }
  if (!best) {
    throw SolverError("projected gradient ascent did not converge within " +
                          std::to_string(options_.max_iterations) + " iterations (gradient norm " +
                          std::to_string(last_norm) + ")",
                      last, last_norm);
  }
  return *best;
}

KktReport kkt_report(const Eigen::VectorXd& a, const Eigen::VectorXd& linear, const InteractionGraph& g) {
  const SimplexQP qp(linear, g);
  KktReport report;
  report.gradient_mapping_norm = qp.gradient_mapping_norm(a);
  const Eigen::VectorXd grad = qp.gradient(a);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > kActiveThreshold) {
      lo = std::min(lo, grad[i]);
      hi = std::max(hi, grad[i]);
    }
  }
  report.active_spread = hi >= lo ? hi - lo : 0.0;
  return report;
}

Eigen::VectorXd mean_values(std::span<const ValueVector> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "value sequence is empty");
  const Eigen::Index n = values.front().values().size();
  detail::CompensatedVectorSum total(n);
  for (const ValueVector& v : values) {
    if (v.values().size() != n) throw Error(ErrorKind::DimensionMismatch, "value sequence lengths differ");
    total.add(v.values());
  }
  return total.value() / static_cast<double>(values.size());
}

QPSolution best_fixed(std::span<const ValueVector> values, const InteractionGraph& g, QPOptions options) {
  return SimplexQP(mean_values(values), g, options).solve();
}

QPSolution per_round_opt(const ValueVector& v, const InteractionGraph& g, QPOptions options,
                         const std::optional<Eigen::VectorXd>& warm_start) {
  return SimplexQP(v.values(), g, options).solve(warm_start);
}

double static_regret(const RunTrace& trace, const InteractionGraph& g, QPOptions options) {
  require_complete(trace);
  const QPSolution best = best_fixed(trace.values, g, options);
  return static_cast<double>(trace.horizon) * best.objective - total_payoff(trace);
}

double dynamic_regret(const RunTrace& trace, const InteractionGraph& g, QPOptions options) {
  require_complete(trace);
  std::unordered_map<std::vector<std::uint64_t>, double, BitsHash> cache;
  std::optional<Eigen::VectorXd> warm;
  detail::CompensatedSum optimum;
  for (std::size_t t = 0; t < trace.horizon; ++t) {
    auto key = bit_key(trace.values[t].values());
    auto it = cache.find(key);
    if (it == cache.end()) {
      const QPSolution sol = per_round_opt(trace.values[t], g, options, warm);
      warm = sol.allocation.weights();
      it = cache.emplace(std::move(key), sol.objective).first;
    }
    optimum.add(it->second);
  }
  return optimum.value() - total_payoff(trace);
}

TruthfulnessGap truthfulness_gap(const RunTrace& trace, const InteractionGraph& g, std::optional<std::size_t> window) {
  require_complete(trace);
  const std::size_t span = window.value_or(trace.horizon);
  if (span == 0 || span > trace.horizon) {
    throw Error(ErrorKind::OutOfRange, "truthfulness window must lie in [1, T]");
  }
  const auto n = static_cast<Eigen::Index>(g.n());
  TruthfulnessGap gap;
  gap.per_round.reserve(span);
  Eigen::VectorXd per_module = Eigen::VectorXd::Zero(n);
  double total = 0.0;
  for (std::size_t t = 0; t < span; ++t) {
    const Eigen::VectorXd mu = reward_values(trace.allocations[t].weights(), trace.values[t].values(), g,
                                             RewardMode::Paper);
    const double mass = mu.sum();
    if (!(mass > 0.0)) {
      throw Error(ErrorKind::NonPositiveTotal,
                  "sum of marginal contributions is non-positive at round " + std::to_string(t + 1));
    }
    const Eigen::VectorXd dev = (trace.allocations[t].weights() - mu / mass).cwiseAbs();
    per_module += dev;
    gap.per_round.push_back(dev.sum());
    total += dev.sum();
  }
  gap.aggregate = total / static_cast<double>(span);
  gap.worst_module = per_module.maxCoeff() / static_cast<double>(span);
  return gap;
}

RegretLedger settle(const RunTrace& trace, const InteractionGraph& g, QPOptions options) {
  require_complete(trace);
  RegretLedger ledger;
  ledger.allocator_payoff = total_payoff(trace);
  const QPSolution best = best_fixed(trace.values, g, options);
  ledger.best_fixed_allocation = best.allocation;
  ledger.best_fixed_payoff = static_cast<double>(trace.horizon) * best.objective;
  ledger.static_regret = ledger.best_fixed_payoff - ledger.allocator_payoff;
  ledger.dynamic_regret = dynamic_regret(trace, g, options);
  ledger.per_round_opt_payoff = ledger.dynamic_regret + ledger.allocator_payoff;
  try {
    ledger.truthfulness = truthfulness_gap(trace, g);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonPositiveTotal) throw;
  }
  return ledger;
}

}  // namespace endocost
