#include "endocost/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "endocost/error.hpp"

namespace endocost {

InteractionGraph build_graph(const GraphSpec& spec) {
  const std::string& kind = spec.topology;
  if (kind == "full") return build_full(spec.n, spec.w_coop, spec.w_comp, spec.lambda);
  if (kind == "ring") return build_ring(spec.n, spec.lambda, spec.w_coop);
  if (kind == "star") return build_star(spec.n, spec.lambda, spec.w_coop);
  if (kind == "wuxing") {
    if (spec.n != 5) throw Error(ErrorKind::InvalidSize, "wuxing topology has n = 5; use generalized_wuxing");
    return build_wuxing(spec.lambda, spec.w_coop, spec.w_comp);
  }
  if (kind == "generalized_wuxing") return build_generalized_wuxing(spec.n, spec.lambda, spec.w_coop, spec.w_comp);
  if (kind == "random_sparse") {
    const std::size_t m = spec.m_target == 0 ? 2 * spec.n : spec.m_target;
    return build_random_sparse(spec.n, m, spec.lambda, spec.seed, std::abs(spec.w_coop));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown topology '" + kind + "'");
}

void ExperimentConfig::validate() const {
  if (allocators.empty()) throw ConfigError("allocators", "at least one allocator is required");
  if (horizons.empty()) throw ConfigError("horizons", "at least one horizon is required");
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (horizons[k] == 0) throw ConfigError("horizons", "horizons must be >= 1");
    if (k > 0 && horizons[k] <= horizons[k - 1]) throw ConfigError("horizons", "horizons must be strictly ascending");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

std::unique_ptr<Allocator> make_allocator(const AllocatorSpec& spec, std::size_t n, std::size_t horizon) {
  switch (spec.kind) {
    case AllocatorKind::Uniform: return std::make_unique<UniformAllocator>(n);
    case AllocatorKind::Gated: return std::make_unique<GatedAllocator>(n, n, spec.gated);
    case AllocatorKind::Competitive: return std::make_unique<CompetitiveAllocator>(n, horizon, spec.competitive);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown allocator kind");
}

const EnvironmentSpec& environment_for(const ExperimentConfig& config, const AllocatorSpec& allocator) {
  return allocator.environment ? *allocator.environment : config.environment;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

RunOutput simulate(const InteractionGraph& g, const AllocatorSpec& allocator_spec, const EnvironmentSpec& environment,
                   RewardMode mode, std::size_t horizon, std::uint64_t seed, RunOptions options) {
  const auto started = std::chrono::steady_clock::now();

  EnvironmentSpec env_spec = environment;
  env_spec.horizon = horizon;
  env_spec.n = g.n();
  env_spec.seed = derive_seed(seed, 1);
  Environment env(env_spec);
  std::mt19937_64 feature_rng(derive_seed(seed, 2));
  auto allocator = make_allocator(allocator_spec, g.n(), horizon);
  const bool needs_features = allocator_spec.kind == AllocatorKind::Gated;

  RunOutput out;
  RunTrace& trace = out.trace;
  trace.horizon = horizon;
  trace.allocations.reserve(horizon);
  trace.values.reserve(horizon);
  trace.rewards.reserve(horizon);
  trace.payoffs.reserve(horizon);

  for (std::size_t t = 1; t <= horizon; ++t) {
    ValueVector v = env.next_value(t);
    std::optional<Eigen::VectorXd> features;
    if (needs_features) {
      features = make_features(v, env_spec.feature_scheme(), allocator_spec.feature_noise, feature_rng);
    }
    Allocation a = allocator->allocate(features ? &*features : nullptr);
    const double p = payoff(a, v, g);
    RewardVector r = reward(a, v, g, mode);
    allocator->observe(Feedback{v, r, p, features}, g);
    trace.allocations.push_back(std::move(a));
    trace.values.push_back(std::move(v));
    trace.rewards.push_back(std::move(r));
    trace.payoffs.push_back(p);
  }

  out.ledger = settle(trace, g);
  const TopologyStats s = stats(g);

  ResultRow& row = out.row;
  row.topology = g.label();
  row.n = g.n();
  row.m_directed = s.m_directed;
  row.d_max = s.d_max;
  row.kappa = s.kappa;
  row.lambda = g.lambda();
  row.allocator = std::string(to_string(allocator_spec.kind));
  row.environment = std::string(to_string(env_spec.kind));
  row.horizon = horizon;
  row.seed = seed;
  row.static_regret = out.ledger.static_regret;
  row.dynamic_regret = out.ledger.dynamic_regret;
  if (out.ledger.truthfulness) row.truthfulness_gap = out.ledger.truthfulness->aggregate;
  row.cost_units = per_step_cost_units(g);
  row.cost_product = cost_product(row);
  row.constraint_violation = !s.satisfies_topology_constraints();
  if (options.measure_wall_clock) {
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  if (!options.keep_trace) out.trace = RunTrace{};
  return out;
}

RunOutput run_once(const ExperimentConfig& config, std::size_t horizon, std::uint64_t seed, RunOptions options) {
  config.validate();
  const InteractionGraph g = build_graph(config.graph);
  const AllocatorSpec& allocator = config.allocators.front();
  return simulate(g, allocator, environment_for(config, allocator), config.reward_mode, horizon, seed, options);
}

SlopeFit slope_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 4) throw Error(ErrorKind::InvalidArgument, "slope fit needs at least 4 points");
  std::vector<double> xs, ys;
  for (const auto& [t, regret] : points) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "slope fit needs T > 0");
    if (!(regret > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "slope fit needs positive regret, got " + format_number(regret) +
                                                  " at T=" + format_number(t) + " (average over seeds first)");
    }
    xs.push_back(std::log(t));
    ys.push_back(std::log(regret));
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "slope fit needs distinct horizons");
  SlopeFit fit;
  fit.exponent = sxy / sxx;
  fit.coefficient = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

std::size_t per_step_cost_units(const InteractionGraph& g) { return g.n() + g.m_directed(); }

double cost_product(const ResultRow& row) {
  return static_cast<double>(row.horizon) * static_cast<double>(row.cost_units) * row.static_regret;
}

bool row_less(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.topology, a.n, a.lambda, a.allocator, a.environment, a.horizon, a.seed) <
         std::tie(b.topology, b.n, b.lambda, b.allocator, b.environment, b.horizon, b.seed);
}

std::size_t default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        job(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

SweepResult regret_sweep(const ExperimentConfig& config, std::size_t workers, RunOptions options) {
  config.validate();
  const InteractionGraph g = build_graph(config.graph);
  const std::size_t per_allocator = config.horizons.size() * config.seeds.size();
  const std::size_t total = config.allocators.size() * per_allocator;
  options.keep_trace = false;

  SweepResult result;
  result.rows.resize(total);
  run_parallel(total, workers, [&](std::size_t k) {
    const AllocatorSpec& alloc = config.allocators[k / per_allocator];
    const std::size_t rest = k % per_allocator;
    const std::size_t horizon = config.horizons[rest / config.seeds.size()];
    const std::uint64_t seed = config.seeds[rest % config.seeds.size()];
    result.rows[k] =
        simulate(g, alloc, environment_for(config, alloc), config.reward_mode, horizon, seed, options).row;
  });

  for (std::size_t a = 0; a < config.allocators.size(); ++a) {
    AllocatorFit fit;
    fit.allocator = std::string(to_string(config.allocators[a].kind));
    fit.environment = std::string(to_string(environment_for(config, config.allocators[a]).kind));
    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
      std::vector<double> regrets;
      for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        regrets.push_back(result.rows[a * per_allocator + h * config.seeds.size() + s].static_regret);
      }
      fit.mean_points.emplace_back(static_cast<double>(config.horizons[h]), mean(regrets));
    }
    try {
      fit.fit = slope_fit(fit.mean_points);
    } catch (const Error& e) {
      fit.error = e.what();
    }
    result.fits.push_back(std::move(fit));
  }
  std::sort(result.rows.begin(), result.rows.end(), row_less);
  return result;
}

TopologySweepResult topology_sweep(const ExperimentConfig& config, std::size_t workers, RunOptions options) {
  config.validate();
  if (config.topologies.empty()) throw ConfigError("topologies", "at least one topology is required");
  AllocatorSpec competitive;
  for (const AllocatorSpec& a : config.allocators) {
    if (a.kind == AllocatorKind::Competitive) {
      competitive = a;
      break;
    }
  }
  competitive.kind = AllocatorKind::Competitive;
  const EnvironmentSpec& env = environment_for(config, competitive);

  std::vector<InteractionGraph> graphs;
  for (const std::string& topology : config.topologies) {
    GraphSpec spec = config.graph;
    spec.topology = topology;
    graphs.push_back(build_graph(spec));
  }

  const std::size_t per_topology = config.horizons.size() * config.seeds.size();
  const std::size_t total = graphs.size() * per_topology;
  options.keep_trace = false;
  TopologySweepResult result;
  result.rows.resize(total);
  run_parallel(total, workers, [&](std::size_t k) {
    const InteractionGraph& g = graphs[k / per_topology];
    const std::size_t rest = k % per_topology;
    const std::size_t horizon = config.horizons[rest / config.seeds.size()];
    const std::uint64_t seed = config.seeds[rest % config.seeds.size()];
    result.rows[k] = simulate(g, competitive, env, config.reward_mode, horizon, seed, options).row;
  });

  for (std::size_t k = 0; k < graphs.size(); ++k) {
    TopologySummary summary;
    summary.topology = graphs[k].label();
    summary.stats = stats(graphs[k]);
    summary.cost_units = per_step_cost_units(graphs[k]);
    summary.constraint_violation = !summary.stats.satisfies_topology_constraints();
    std::vector<double> regrets, products;
    for (std::size_t r = 0; r < per_topology; ++r) {
      regrets.push_back(result.rows[k * per_topology + r].static_regret);
      products.push_back(result.rows[k * per_topology + r].cost_product);
    }
    summary.mean_static_regret = mean(regrets);
    summary.mean_cost_product = mean(products);
    result.summaries.push_back(summary);
  }
  std::sort(result.rows.begin(), result.rows.end(), row_less);
  return result;
}

TruthfulnessStudy truthfulness_study(const ExperimentConfig& config, std::size_t workers, RunOptions options) {
  config.validate();
  const InteractionGraph g = build_graph(config.graph);
  AllocatorSpec competitive;
  for (const AllocatorSpec& a : config.allocators) {
    if (a.kind == AllocatorKind::Competitive) {
      competitive = a;
      break;
    }
  }
  competitive.kind = AllocatorKind::Competitive;
  const EnvironmentSpec& env = environment_for(config, competitive);

  TruthfulnessStudy study;
  if (env.kind != EnvironmentKind::Stationary) {
    study.warnings.emplace_back("environment '" + std::string(to_string(env.kind)) +
                                "' is not stationary; truthfulness convergence assumes V_T = 0");
  }

  const std::size_t total = config.horizons.size() * config.seeds.size();
  std::vector<double> gaps(total);
  study.rows.resize(total);
  options.keep_trace = true;
  run_parallel(total, workers, [&](std::size_t k) {
    const std::size_t horizon = config.horizons[k / config.seeds.size()];
    const std::uint64_t seed = config.seeds[k % config.seeds.size()];
    RunOutput out = simulate(g, competitive, env, config.reward_mode, horizon, seed, options);
    gaps[k] = truthfulness_gap(out.trace, g).aggregate;
    study.rows[k] = std::move(out.row);
  });

  std::map<std::size_t, double> by_horizon;
  for (std::size_t h = 0; h < config.horizons.size(); ++h) {
    std::vector<double> xs(gaps.begin() + static_cast<std::ptrdiff_t>(h * config.seeds.size()),
                           gaps.begin() + static_cast<std::ptrdiff_t>((h + 1) * config.seeds.size()));
    TruthfulnessPoint p;
    p.horizon = config.horizons[h];
    p.mean_gap = mean(xs);
    const double t = static_cast<double>(p.horizon);
    p.normalized = t > 1.0 ? p.mean_gap * std::sqrt(t) / std::log(t) : 0.0;
    study.points.push_back(p);
    by_horizon[p.horizon] = p.mean_gap;
  }

  for (auto it = by_horizon.rbegin(); it != by_horizon.rend(); ++it) {
    if (it->first % 4 != 0) continue;
    auto quarter = by_horizon.find(it->first / 4);
    if (quarter == by_horizon.end()) continue;
    study.decreasing = it->second < quarter->second;
    break;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const TruthfulnessPoint& p : study.points) {
    if (p.horizon < 2) continue;
    lo = std::min(lo, p.normalized);
    hi = std::max(hi, p.normalized);
  }
  study.normalized_spread = (lo > 0.0 && std::isfinite(lo)) ? hi / lo : std::numeric_limits<double>::infinity();
  study.rate_consistent = study.normalized_spread < kTruthfulnessSpreadLimit;
  std::sort(study.rows.begin(), study.rows.end(), row_less);
  return study;
}

std::string format_number(double x) {
  // Shortest round-trip decimal; deterministic across runs.
  return nlohmann::json(x).dump();
}

std::string csv_line(const ResultRow& row) {
  std::string line;
  auto field = [&line](const std::string& s) {
    if (!line.empty()) line += ',';
    line += s;
  };
  field(row.topology);
  field(std::to_string(row.n));
  field(std::to_string(row.m_directed));
  field(std::to_string(row.d_max));
  field(std::to_string(row.kappa));
  field(format_number(row.lambda));
  field(row.allocator);
  field(row.environment);
  field(std::to_string(row.horizon));
  field(std::to_string(row.seed));
  field(format_number(row.static_regret));
  field(format_number(row.dynamic_regret));
  line += ',';
  if (row.truthfulness_gap) line += format_number(*row.truthfulness_gap);
  field(std::to_string(row.cost_units));
  field(format_number(row.cost_product));
  field(format_number(row.wall_seconds));
  return line;
}

std::string jsonl_line(const ResultRow& row) {
  nlohmann::ordered_json j;
  j["topology"] = row.topology;
  j["n"] = row.n;
  j["m_directed"] = row.m_directed;
  j["d_max"] = row.d_max;
  j["kappa"] = row.kappa;
  j["lambda"] = row.lambda;
  j["allocator"] = row.allocator;
  j["environment"] = row.environment;
  j["T"] = row.horizon;
  j["seed"] = row.seed;
  j["static_regret"] = row.static_regret;
  j["dynamic_regret"] = row.dynamic_regret;
  j["truthfulness_gap"] = row.truthfulness_gap ? nlohmann::ordered_json(*row.truthfulness_gap) : nullptr;
  j["cost_units"] = row.cost_units;
  j["cost_product"] = row.cost_product;
  j["wall_seconds"] = row.wall_seconds;
  return j.dump();
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows, bool header) {
  if (header) out << kCsvHeader << '\n';
  for (const ResultRow& row : rows) out << csv_line(row) << '\n';
}

void write_jsonl(std::ostream& out, std::span<const ResultRow> rows) {
  for (const ResultRow& row : rows) out << jsonl_line(row) << '\n';
}

void write_trace_jsonl(std::ostream& out, const RunTrace& trace) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  for (std::size_t t = 0; t < trace.payoffs.size(); ++t) {
    nlohmann::ordered_json j;
    j["t"] = t + 1;
    j["a"] = vec(trace.allocations[t].weights());
    j["v"] = vec(trace.values[t].values());
    j["reward"] = vec(trace.rewards[t].rewards);
    j["payoff"] = trace.payoffs[t];
    out << j.dump() << '\n';
  }
}

std::string run_id(const ResultRow& row) {
  return row.topology + "-n" + std::to_string(row.n) + "-" + row.allocator + "-" + row.environment + "-T" +
         std::to_string(row.horizon) + "-s" + std::to_string(row.seed);
}

}  // namespace endocost
