// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "endocost/error.hpp"
#include "endocost/harness.hpp"
#include "oracles.hpp"

using namespace endocost;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::vector<std::size_t> horizon_grid() {
  std::vector<std::size_t> hs;
  for (int k = 10; k <= 16; ++k) hs.push_back(std::size_t{1} << k);
  return hs;
}

std::vector<std::uint64_t> seed_list(std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = i;
  return s;
}

AllocatorSpec allocator(AllocatorKind kind, std::optional<EnvironmentKind> env = std::nullopt) {
  AllocatorSpec a;
  a.kind = kind;
  if (env) {
    EnvironmentSpec e;
    e.kind = *env;
    a.environment = e;
  }
  return a;
}

ExperimentConfig wuxing_config(EnvironmentKind env) {
  ExperimentConfig c;
  c.graph.topology = "wuxing";
  c.graph.n = 5;
  c.graph.lambda = 0.05;
  c.environment.kind = env;
  c.horizons = horizon_grid();
  c.seeds = seed_list(16);
  return c;
}

// Rows from every run in the suite, for the dynamic >= static check.
std::vector<ResultRow> g_all_rows;

void remember(const std::vector<ResultRow>& rows) { g_all_rows.insert(g_all_rows.end(), rows.begin(), rows.end()); }

double bound(const ResultRow& r) {
  const double t = static_cast<double>(r.horizon);
  return 2.0 * std::sqrt(t * std::log(static_cast<double>(r.n))) + r.lambda * static_cast<double>(r.m_directed) / std::sqrt(t) +
         1e-6;
}

std::string describe(const AllocatorFit& f) {
  if (!f.fit) return f.allocator + "@" + f.environment + " fit failed (" + f.error + ")";
  return f.allocator + "@" + f.environment + " p=" + fmt(f.fit->exponent) + " (R2=" + fmt(f.fit->r_squared) + ")";
}

Outcome slope_separation(std::size_t workers) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentConfig c = wuxing_config(EnvironmentKind::Alternating);
  c.allocators = {allocator(AllocatorKind::Uniform), allocator(AllocatorKind::Competitive),
                  allocator(AllocatorKind::Gated, EnvironmentKind::InteractionDominant)};
  const SweepResult sweep = regret_sweep(c, workers);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  remember(sweep.rows);

  const AllocatorFit& uni = sweep.fits[0];
  const AllocatorFit& comp = sweep.fits[1];
  const AllocatorFit& gate = sweep.fits[2];
  Outcome o;
  const bool uni_ok = uni.fit && uni.fit->exponent >= 0.90 && uni.fit->exponent <= 1.10;
  const bool comp_ok = comp.fit && comp.fit->exponent >= 0.40 && comp.fit->exponent <= 0.60;
  const bool gate_ok = gate.fit && uni.fit && comp.fit && gate.fit->exponent > comp.fit->exponent &&
                       gate.fit->exponent < uni.fit->exponent && gate.fit->exponent >= 0.55;
  o.pass = uni_ok && comp_ok && gate_ok && seconds < 120.0;
  o.detail = describe(uni) + " [0.90,1.10] " + (uni_ok ? "ok" : "miss") + "; " + describe(comp) + " [0.40,0.60] " +
             (comp_ok ? "ok" : "miss") + "; " + describe(gate) + " between and >=0.55 " + (gate_ok ? "ok" : "miss") +
             "; " + fmt(seconds, 3) + "s";
  for (const AllocatorFit& f : sweep.fits) {
    std::string pts;
    for (const auto& [t, r] : f.mean_points) pts += " " + fmt(t, 6) + ":" + fmt(r, 5);
    o.info.push_back("mean static regret " + f.allocator + "@" + f.environment + ":" + pts);
  }

  // Not part of the criterion: the same grid under other settings.
  ExperimentConfig extra = wuxing_config(EnvironmentKind::Alternating);
  extra.allocators = {allocator(AllocatorKind::Gated), allocator(AllocatorKind::Competitive, EnvironmentKind::InteractionDominant)};
  const SweepResult more = regret_sweep(extra, workers);
  remember(more.rows);
  for (const AllocatorFit& f : more.fits) o.info.push_back("paper reward: " + describe(f));
  extra.reward_mode = RewardMode::ExactGradient;
  extra.allocators = {allocator(AllocatorKind::Competitive),
                      allocator(AllocatorKind::Competitive, EnvironmentKind::InteractionDominant)};
  const SweepResult exact = regret_sweep(extra, workers);
  remember(exact.rows);
  for (const AllocatorFit& f : exact.fits) {
    std::string pts;
    for (const auto& [t, r] : f.mean_points) pts += " " + fmt(t, 6) + ":" + fmt(r, 5);
    o.info.push_back("exact-gradient reward: " + describe(f) + ";" + pts);
  }
  return o;
}

Outcome regret_bound(std::size_t workers) {
  std::vector<ResultRow> rows;
  for (EnvironmentKind env : {EnvironmentKind::Stationary, EnvironmentKind::Alternating, EnvironmentKind::BoundedDrift}) {
    ExperimentConfig c = wuxing_config(env);
    c.seeds = seed_list(8);
    c.allocators = {allocator(AllocatorKind::Competitive)};
    const SweepResult s = regret_sweep(c, workers);
    rows.insert(rows.end(), s.rows.begin(), s.rows.end());
  }
  remember(rows);
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  const ResultRow* worst = nullptr;
  std::map<std::string, std::size_t> by_group;
  for (const ResultRow& r : rows) {
    const double ratio = r.static_regret / bound(r);
    if (r.static_regret > bound(r)) {
      ++violations;
      ++by_group[r.environment + "@T=" + std::to_string(r.horizon)];
    }
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = &r;
    }
  }
  Outcome o;
  o.pass = violations == 0 && rows.size() >= 100;
  o.detail = std::to_string(rows.size()) + " runs (stationary, alternating, bounded_drift x 2^10..2^16 x 8 seeds), " +
             std::to_string(violations) + " above 2 sqrt(T ln N) + lambda m / sqrt(T); worst regret/bound " +
             fmt(worst_ratio) + (worst ? " at " + worst->environment + " T=" + std::to_string(worst->horizon) : "");
  for (const auto& [group, count] : by_group) o.info.push_back("violations " + group + ": " + std::to_string(count));

  // Same grid with the exact-gradient reward, reported only.
  std::size_t exact_violations = 0, exact_runs = 0;
  double exact_worst = -std::numeric_limits<double>::infinity();
  for (EnvironmentKind env : {EnvironmentKind::Stationary, EnvironmentKind::Alternating, EnvironmentKind::BoundedDrift}) {
    ExperimentConfig c = wuxing_config(env);
    c.seeds = seed_list(8);
    c.reward_mode = RewardMode::ExactGradient;
    c.allocators = {allocator(AllocatorKind::Competitive)};
    const SweepResult s = regret_sweep(c, workers);
    remember(s.rows);
    for (const ResultRow& r : s.rows) {
      ++exact_runs;
      if (r.static_regret > bound(r)) ++exact_violations;
      exact_worst = std::max(exact_worst, r.static_regret / bound(r));
    }
  }
  o.info.push_back("exact-gradient reward: " + std::to_string(exact_violations) + " of " + std::to_string(exact_runs) +
                   " runs above the bound; worst regret/bound " + fmt(exact_worst));
  return o;
}

Outcome closed_form() {
  ExperimentConfig c;
  c.graph.topology = "full";
  c.graph.n = 2;
  c.graph.lambda = 0.0;
  c.environment.kind = EnvironmentKind::Alternating;
  c.allocators = {allocator(AllocatorKind::Uniform)};
  const RunOutput out = run_once(c, 1000, 0);
  remember({out.row});
  Outcome o;
  o.pass = std::abs(out.row.static_regret - 500.0) <= 1e-9;
  o.detail = "static regret " + fmt(out.row.static_regret, 12) + " (target 500 +- 1e-9); dynamic regret " +
             fmt(out.row.dynamic_regret, 12);
  return o;
}

Outcome truthfulness(std::size_t workers) {
  ExperimentConfig c = wuxing_config(EnvironmentKind::Stationary);
  c.environment.value_low = 0.2;
  c.allocators = {allocator(AllocatorKind::Competitive)};
  const TruthfulnessStudy study = truthfulness_study(c, workers);
  remember(study.rows);
  double gap_t = 0, gap_quarter = 0;
  std::string series;
  for (const TruthfulnessPoint& p : study.points) {
    if (p.horizon == (std::size_t{1} << 14)) gap_t = p.mean_gap;
    if (p.horizon == (std::size_t{1} << 12)) gap_quarter = p.mean_gap;
    series += " " + std::to_string(p.horizon) + ":" + fmt(p.mean_gap) + "/" + fmt(p.normalized);
  }
  Outcome o;
  const bool decreasing = gap_t < gap_quarter;
  o.pass = decreasing && study.normalized_spread < 3.0;
  o.detail = "gap(2^14)=" + fmt(gap_t) + " vs gap(2^12)=" + fmt(gap_quarter) + (decreasing ? " decreasing" : " not decreasing") +
             "; gap sqrt(T)/ln T spread " + fmt(study.normalized_spread) + "x (limit 3x)";
  o.info.push_back("T:gap/normalized" + series);
  return o;
}

Outcome graph_invariants() {
  const TopologyStats w = stats(build_wuxing(0.05));
  bool ok = w.m_directed == 10 && w.d_max == 4 && w.kappa == 4;
  std::string bad;
  for (std::size_t n = 5; n <= 12; ++n) {
    if (build_generalized_wuxing(n, 0.05).m_directed() != 2 * n) {
      ok = false;
      bad += " n=" + std::to_string(n);
    }
  }
  Outcome o;
  o.pass = ok;
  o.detail = "wuxing m_directed=" + std::to_string(w.m_directed) + " d_max=" + std::to_string(w.d_max) +
             " kappa=" + std::to_string(w.kappa) + "; generalized m_directed=2n for n=5..12" +
             (bad.empty() ? "" : " except" + bad);
  return o;
}

Outcome topology_order(std::size_t workers) {
  ExperimentConfig c;
  c.graph.n = 5;
  c.graph.lambda = 0.05;
  c.topologies = {"full", "ring", "star", "wuxing"};
  c.environment.kind = EnvironmentKind::Stationary;
  c.horizons = {std::size_t{1} << 14};
  c.seeds = seed_list(16);
  const TopologySweepResult result = topology_sweep(c, workers);
  remember(result.rows);
  double wuxing = 0, full = 0;
  bool star_flagged = false;
  Outcome o;
  for (const TopologySummary& s : result.summaries) {
    if (s.topology == "wuxing") wuxing = s.mean_cost_product;
    if (s.topology == "full") full = s.mean_cost_product;
    if (s.topology == "star") star_flagged = s.constraint_violation;
    o.info.push_back(s.topology + ": units=" + std::to_string(s.cost_units) + " mean regret=" + fmt(s.mean_static_regret) +
                     " mean C_T=" + fmt(s.mean_cost_product) + (s.constraint_violation ? " [violates constraints]" : ""));
  }
  o.pass = wuxing <= full && star_flagged;
  o.detail = "mean cost_product wuxing " + fmt(wuxing) + " vs full " + fmt(full) + "; star " +
             (star_flagged ? "flagged" : "not flagged");
  return o;
}

Eigen::VectorXd random_values(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

InteractionGraph random_graph(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < ni; ++j)
      if (i != j) w(i, j) = u(rng);
  return InteractionGraph(w, std::abs(u(rng)) / (2.0 * static_cast<double>(n)));
}

Outcome oracle_equivalence(std::size_t workers) {
  std::mt19937_64 rng(20240501);
  struct Instance {
    InteractionGraph g;
    Eigen::VectorXd v;
  };
  std::vector<Instance> instances;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng() % 3;
    InteractionGraph g = random_graph(n, rng);
    instances.push_back({std::move(g), random_values(static_cast<Eigen::Index>(n), rng)});
  }
  std::vector<double> gap(100), kkt(100);
  run_parallel(100, workers, [&](std::size_t k) {
    const Instance& in = instances[k];
    const QPSolution sol = per_round_opt(ValueVector(in.v), in.g);
    const oracle::GridResult grid = oracle::simplex_grid_max(in.v, in.g.weights(), in.g.lambda(), 500);
    gap[k] = std::abs(sol.objective - grid.best);
    kkt[k] = kkt_report(sol.allocation.weights(), in.v, in.g).gradient_mapping_norm;
  });
  const double worst_gap = *std::max_element(gap.begin(), gap.end());
  const double worst_kkt = *std::max_element(kkt.begin(), kkt.end());
  Outcome o;
  o.pass = worst_gap <= 2e-3 && worst_kkt <= 1e-8;
  o.detail = "100 instances n in {2,3,4}, grid 1/500: max |solver - grid| " + fmt(worst_gap) + " (<= 2e-3), max KKT residual " +
             fmt(worst_kkt) + " (<= 1e-8)";
  return o;
}

Outcome numerical_identities(std::size_t workers) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  auto simplex_point = [&](Eigen::Index n) {
    Eigen::VectorXd a(n);
    for (Eigen::Index i = 0; i < n; ++i) a[i] = e(rng);
    return Eigen::VectorXd(a / a.sum());
  };

  double fd_reward = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng() % 7;
    const InteractionGraph g = random_graph(n, rng);
    const Eigen::VectorXd a = simplex_point(static_cast<Eigen::Index>(n));
    const Eigen::VectorXd v = random_values(static_cast<Eigen::Index>(n), rng);
    const Eigen::VectorXd fd = oracle::central_gradient([&](const Eigen::VectorXd& x) { return payoff(x, v, g); }, a, 1e-5);
    fd_reward = std::max(fd_reward, (fd - reward_values(a, v, g, RewardMode::ExactGradient)).cwiseAbs().maxCoeff());
  }

  double fd_gate = 0.0;
  std::normal_distribution<double> z(0.0, 0.7);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng() % 5;
    const auto ni = static_cast<Eigen::Index>(n);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 5);
    const InteractionGraph g = random_graph(n, rng);
    Eigen::MatrixXd G(ni, d);
    for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = z(rng);
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = u(rng);
    const Eigen::VectorXd v = random_values(ni, rng);
    const Eigen::VectorXd a = softmax(G * x);
    const Eigen::MatrixXd analytic = gating_gradient(a, reward_values(a, v, g, RewardMode::ExactGradient), x);
    const Eigen::MatrixXd fd = oracle::central_gradient_matrix(
        [&](const Eigen::MatrixXd& gm) { return payoff(softmax(gm * x), v, g); }, G, 1e-5);
    fd_gate = std::max(fd_gate, (analytic - fd).cwiseAbs().maxCoeff());
  }

  double ratio_err = 0.0, shift_err = 0.0;
  for (int k = 0; k < 500; ++k) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 7);
    const Allocation a(simplex_point(n));
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = 3.0 * u(rng) - 1.5;
    const double eta = u(rng);
    const Allocation next = competitive_update(a, r, eta);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double want = a.weights()[i] / a.weights()[j] * std::exp(eta * (r[i] - r[j]));
        const double got = next.weights()[i] / next.weights()[j];
        ratio_err = std::max(ratio_err, std::abs(got - want) / std::max(1.0, std::abs(want)));
      }
    const Allocation shifted = competitive_update(a, (r.array() + 20.0 * u(rng) - 10.0).matrix(), eta);
    shift_err = std::max(shift_err, (shifted.weights() - next.weights()).cwiseAbs().maxCoeff());
  }

  // Simplex membership of every emitted allocation, all allocators and environments.
  std::vector<std::tuple<AllocatorKind, EnvironmentKind, std::uint64_t>> jobs;
  for (AllocatorKind kind : {AllocatorKind::Uniform, AllocatorKind::Gated, AllocatorKind::Competitive})
    for (EnvironmentKind env : {EnvironmentKind::Stationary, EnvironmentKind::Alternating, EnvironmentKind::BoundedDrift,
                                EnvironmentKind::InteractionDominant})
      for (std::uint64_t seed = 0; seed < 4; ++seed) jobs.emplace_back(kind, env, seed);
  std::vector<double> simplex_err(jobs.size());
  std::vector<ResultRow> rows(jobs.size());
  const InteractionGraph wuxing = build_wuxing(0.05);
  run_parallel(jobs.size(), workers, [&](std::size_t k) {
    const auto [kind, env_kind, seed] = jobs[k];
    EnvironmentSpec env;
    env.kind = env_kind;
    const RunOutput out = simulate(wuxing, allocator(kind), env, RewardMode::Paper, 8192, seed);
    double worst = 0.0;
    for (const Allocation& a : out.trace.allocations) {
      worst = std::max(worst, std::abs(a.weights().sum() - 1.0));
      if (a.weights().minCoeff() < 0.0) worst = 1.0;
    }
    simplex_err[k] = worst;
    rows[k] = out.row;
  });
  remember(rows);
  const double worst_simplex = *std::max_element(simplex_err.begin(), simplex_err.end());

  std::size_t ordering_failures = 0;
  for (const ResultRow& r : g_all_rows)
    if (r.dynamic_regret < r.static_regret - 1e-9) ++ordering_failures;

  Outcome o;
  o.pass = fd_reward <= 1e-7 && fd_gate <= 1e-6 && ratio_err <= 1e-12 && shift_err <= 1e-12 && worst_simplex <= 1e-12 &&
           ordering_failures == 0;
  o.detail = "reward FD " + fmt(fd_reward, 3) + " (<=1e-7); gate FD " + fmt(fd_gate, 3) + " (<=1e-6); MWU ratio " +
             fmt(ratio_err, 3) + ", shift " + fmt(shift_err, 3) + " (<=1e-12); simplex " + fmt(worst_simplex, 3) + " over " +
             std::to_string(jobs.size()) + " traces; dynamic<static in " + std::to_string(ordering_failures) + " of " +
             std::to_string(g_all_rows.size()) + " runs";
  return o;
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "endocost_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "config.json") << R"({
      "graph": {"topology": "wuxing", "n": 5, "lambda": 0.05},
      "environment": {"kind": "bounded_drift"},
      "allocators": [{"kind": "uniform"}, {"kind": "gated"}, {"kind": "competitive"}],
      "horizons": [512, 1024, 2048, 4096],
      "seeds": [0, 1, 2, 3]
    })";
  }
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::vector<std::string> outputs;
  std::ostringstream sink;
  bool exit_ok = true;
  for (const char* workers : {"1", "1", "4"}) {
    const fs::path out = root / ("out" + std::to_string(outputs.size()));
    const int code = cli::run_cli({"endocost", "sweep", "--config", (root / "config.json").string(), "--out", out.string(),
                                   "--workers", workers},
                                  sink, sink);
    exit_ok = exit_ok && code == 0;
    outputs.push_back(read(out / "results.csv"));
  }
  // Single runs through `run` must reproduce too.
  std::vector<std::string> singles;
  for (int k = 0; k < 2; ++k) {
    const fs::path out = root / ("single" + std::to_string(k));
    exit_ok = exit_ok && cli::run_cli({"endocost", "run", "--config", (root / "config.json").string(), "--out", out.string(),
                                       "--allocator", "gated", "--seed", "9", "--horizon", "3000"},
                                      sink, sink) == 0;
    singles.push_back(read(out / "results.csv"));
  }
  fs::remove_all(root);
  Outcome o;
  const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2] && singles[0] == singles[1];
  o.pass = exit_ok && same && !outputs[0].empty();
  o.detail = "sweep CSV (48 rows) identical across 3 invocations with 1/1/4 workers: " + std::string(same ? "yes" : "no") +
             "; single-run CSV identical: " + (singles[0] == singles[1] ? "yes" : "no");
  return o;
}

}  // namespace

int main() {
  const std::size_t workers = default_workers();
  std::cout << "acceptance: workers=" << workers << '\n';
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "slope separation", [&] { return slope_separation(workers); }},
      {2, "competitive regret bound", [&] { return regret_bound(workers); }},
      {3, "uniform closed form", [] { return closed_form(); }},
      {4, "truthfulness convergence", [&] { return truthfulness(workers); }},
      {5, "graph invariants", [] { return graph_invariants(); }},
      {6, "topology ordering", [&] { return topology_order(workers); }},
      {7, "oracle equivalence", [&] { return oracle_equivalence(workers); }},
      {8, "numerical identities", [&] { return numerical_identities(workers); }},
      {9, "determinism", [] { return determinism(); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail << '\n';
    for (const std::string& line : o.info) std::cout << "      " << line << '\n';
    std::cout.flush();
  }
  std::cout << "acceptance: " << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
