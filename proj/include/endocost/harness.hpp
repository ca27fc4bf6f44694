#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "endocost/allocators.hpp"
#include "endocost/environments.hpp"
#include "endocost/graph.hpp"
#include "endocost/payoff.hpp"
#include "endocost/regret.hpp"

namespace endocost {

struct GraphSpec {
  // full | ring | star | wuxing | generalized_wuxing | random_sparse
  std::string topology = "wuxing";
  std::size_t n = 5;
  double lambda = 0.05;
  // Cooperative / competitive weights (sheng / ke for Wuxing; ring and star use w_coop).
  double w_coop = 1.0;
  double w_comp = -1.0;
  // random_sparse only; 0 means 2n.
  std::size_t m_target = 0;
  std::uint64_t seed = 0;
};

InteractionGraph build_graph(const GraphSpec& spec);

struct AllocatorSpec {
  AllocatorKind kind = AllocatorKind::Competitive;
  GatedParams gated;
  CompetitiveParams competitive;
  double feature_noise = 0.1;
  // Replaces the experiment-wide environment for this allocator (sweeps).
  std::optional<EnvironmentSpec> environment;
};

struct ExperimentConfig {
  GraphSpec graph;
  std::vector<std::string> topologies{"full", "ring", "star", "wuxing"};
  EnvironmentSpec environment;
  std::vector<AllocatorSpec> allocators{AllocatorSpec{}};
  std::vector<std::size_t> horizons{1024, 2048, 4096, 8192, 16384, 32768, 65536};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  RewardMode reward_mode = RewardMode::Paper;

  void validate() const;
};

struct RunOptions {
  bool measure_wall_clock = false;
  bool keep_trace = true;
};

struct ResultRow {
  std::string topology;
  std::size_t n = 0;
  std::size_t m_directed = 0;
  std::size_t d_max = 0;
  std::size_t kappa = 0;
  double lambda = 0.0;
  std::string allocator;
  std::string environment;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  double static_regret = 0.0;
  double dynamic_regret = 0.0;
  // Unset when the marginal contributions have a non-positive total.
  std::optional<double> truthfulness_gap;
  std::size_t cost_units = 0;
  double cost_product = 0.0;
  double wall_seconds = 0.0;
  // Not part of the CSV/JSONL schema; surfaced in topology tables.
  bool constraint_violation = false;
};

struct RunOutput {
  RunTrace trace;
  RegretLedger ledger;
  ResultRow row;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

RunOutput simulate(const InteractionGraph& g, const AllocatorSpec& allocator, const EnvironmentSpec& environment,
                   RewardMode mode, std::size_t horizon, std::uint64_t seed, RunOptions options = {});

// Uses config.graph, config.environment and the first allocator.
RunOutput run_once(const ExperimentConfig& config, std::size_t horizon, std::uint64_t seed, RunOptions options = {});

struct SlopeFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double r_squared = 0.0;
};

// OLS of ln(regret) on ln(T).
SlopeFit slope_fit(std::span<const std::pair<double, double>> points);

std::size_t per_step_cost_units(const InteractionGraph& g);
double cost_product(const ResultRow& row);

bool row_less(const ResultRow& a, const ResultRow& b);

// Runs independent jobs on at most `workers` threads; the first exception is rethrown.
void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

std::size_t default_workers();

struct AllocatorFit {
  std::string allocator;
  std::string environment;
  std::vector<std::pair<double, double>> mean_points;
  std::optional<SlopeFit> fit;
  std::string error;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<AllocatorFit> fits;
};

// Every allocator x horizon x seed; seeds are averaged before fitting.
SweepResult regret_sweep(const ExperimentConfig& config, std::size_t workers, RunOptions options = {});

struct TopologySummary {
  std::string topology;
  TopologyStats stats;
  std::size_t cost_units = 0;
  double mean_static_regret = 0.0;
  double mean_cost_product = 0.0;
  bool constraint_violation = false;
};

struct TopologySweepResult {
  std::vector<ResultRow> rows;
  std::vector<TopologySummary> summaries;
};

// Competitive allocator on every topology in config.topologies (shared n, lambda).
TopologySweepResult topology_sweep(const ExperimentConfig& config, std::size_t workers, RunOptions options = {});

struct TruthfulnessPoint {
  std::size_t horizon = 0;
  double mean_gap = 0.0;
  // gap * sqrt(T) / ln T
  double normalized = 0.0;
};

struct TruthfulnessStudy {
  std::vector<ResultRow> rows;
  std::vector<TruthfulnessPoint> points;
  bool decreasing = false;
  double normalized_spread = 0.0;
  bool rate_consistent = false;
  std::vector<std::string> warnings;
};

inline constexpr double kTruthfulnessSpreadLimit = 3.0;

// Competitive allocator across horizons; compares gap(T_max) to gap(T_max / 4).
TruthfulnessStudy truthfulness_study(const ExperimentConfig& config, std::size_t workers, RunOptions options = {});

inline constexpr const char* kCsvHeader =
    "topology,n,m_directed,d_max,kappa,lambda,allocator,environment,T,seed,static_regret,dynamic_regret,"
    "truthfulness_gap,cost_units,cost_product,wall_seconds";

std::string format_number(double x);
std::string csv_line(const ResultRow& row);
std::string jsonl_line(const ResultRow& row);
void write_csv(std::ostream& out, std::span<const ResultRow> rows, bool header = true);
void write_jsonl(std::ostream& out, std::span<const ResultRow> rows);
void write_trace_jsonl(std::ostream& out, const RunTrace& trace);
std::string run_id(const ResultRow& row);

}  // namespace endocost
