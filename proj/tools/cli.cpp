#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "endocost/config.hpp"
#include "endocost/error.hpp"
#include "endocost/harness.hpp"

namespace endocost::cli {

namespace fs = std::filesystem;

namespace {

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<std::string> allocator;
  std::optional<std::string> topology;
  std::optional<std::size_t> workers;
  bool trace = false;
  bool allow_unsafe_lambda = false;
  bool wall_clock = false;
  int verbosity = 0;
};

// Config-level failure that should exit with kConfig.
struct ConfigFailure {
  std::string message;
};

std::size_t resolve_workers(const Invocation& inv) {
  if (inv.workers) return std::max<std::size_t>(1, *inv.workers);
  if (const char* env = std::getenv("ENDOCOST_WORKERS")) {
    try {
      const long parsed = std::stol(env);
      if (parsed > 0) return static_cast<std::size_t>(parsed);
    } catch (const std::exception&) {
    }
    throw ConfigFailure{"ENDOCOST_WORKERS: expected a positive integer"};
  }
  return default_workers();
}

ExperimentConfig prepare_config(const Invocation& inv) {
  ExperimentConfig config = load_config(inv.config_path);
  if (inv.seed) config.seeds = {*inv.seed};
  if (inv.horizon) {
    if (*inv.horizon == 0) throw ConfigError("--horizon", "must be >= 1");
    config.horizons = {*inv.horizon};
  }
  if (inv.topology) {
    if (inv.subcommand == "topology") {
      config.topologies = {*inv.topology};
    } else {
      config.graph.topology = *inv.topology;
    }
  }
  if (inv.allocator) {
    AllocatorKind kind;
    try {
      kind = allocator_kind_from_string(*inv.allocator);
    } catch (const Error& e) {
      throw ConfigError("--allocator", e.what());
    }
    std::vector<AllocatorSpec> kept;
    for (const AllocatorSpec& a : config.allocators)
      if (a.kind == kind) kept.push_back(a);
    if (kept.empty()) {
      AllocatorSpec a;
      a.kind = kind;
      kept.push_back(a);
    }
    config.allocators = std::move(kept);
  }
  config.validate();
  return config;
}

std::vector<InteractionGraph> graphs_for(const Invocation& inv, const ExperimentConfig& config) {
  std::vector<InteractionGraph> graphs;
  try {
    if (inv.subcommand == "topology") {
      for (const std::string& t : config.topologies) {
        GraphSpec spec = config.graph;
        spec.topology = t;
        graphs.push_back(build_graph(spec));
      }
    } else {
      graphs.push_back(build_graph(config.graph));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConstructionFailed) throw;
    throw ConfigError("graph", e.what());
  }
  return graphs;
}

void check_assumptions(const Invocation& inv, const ExperimentConfig& config) {
  if (inv.allow_unsafe_lambda) return;
  for (const InteractionGraph& g : graphs_for(inv, config)) {
    const ValidationReport report = validate_assumptions(g);
    if (!report.ok()) throw ConfigError("graph", report.violations.front());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::InvalidArgument, "cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream f(path, std::ios::out | mode);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  return f;
}

void write_results(const fs::path& dir, std::span<const ResultRow> rows) {
  ensure_dir(dir);
  auto csv = open_out(dir / "results.csv");
  write_csv(csv, rows);
  auto jsonl = open_out(dir / "results.jsonl");
  write_jsonl(jsonl, rows);
}

RunOptions run_options(const Invocation& inv) {
  RunOptions options;
  options.measure_wall_clock = inv.wall_clock;
  return options;
}

int cmd_run(const Invocation& inv, std::ostream& out) {
  const ExperimentConfig config = prepare_config(inv);
  check_assumptions(inv, config);
  RunOptions options = run_options(inv);
  options.keep_trace = inv.trace;
  const RunOutput result = run_once(config, config.horizons.front(), config.seeds.front(), options);

  const fs::path dir(inv.out_dir);
  ensure_dir(dir);
  const fs::path csv_path = dir / "results.csv";
  const bool fresh = !fs::exists(csv_path);
  {
    auto csv = open_out(csv_path, std::ios::app);
    if (fresh) csv << kCsvHeader << '\n';
    csv << csv_line(result.row) << '\n';
    auto jsonl = open_out(dir / "results.jsonl", std::ios::app);
    jsonl << jsonl_line(result.row) << '\n';
  }
  if (inv.trace) {
    ensure_dir(dir / "traces");
    auto trace = open_out(dir / "traces" / (run_id(result.row) + ".jsonl"));
    write_trace_jsonl(trace, result.trace);
  }
  const ResultRow& r = result.row;
  out << "run: topology=" << r.topology << " allocator=" << r.allocator << " environment=" << r.environment
      << " T=" << r.horizon << " seed=" << r.seed << " static_regret=" << format_number(r.static_regret)
      << " dynamic_regret=" << format_number(r.dynamic_regret) << " truthfulness_gap="
      << (r.truthfulness_gap ? format_number(*r.truthfulness_gap) : std::string("undefined"))
      << " cost_product=" << format_number(r.cost_product) << '\n';
  return kOk;
}

int cmd_sweep(const Invocation& inv, std::ostream& out) {
  const ExperimentConfig config = prepare_config(inv);
  check_assumptions(inv, config);
  const SweepResult result = regret_sweep(config, resolve_workers(inv), run_options(inv));
  const fs::path dir(inv.out_dir);
  write_results(dir, result.rows);

  auto slopes = open_out(dir / "slopes.csv");
  slopes << "allocator,environment,exponent,coefficient,r_squared,error\n";
  auto means = open_out(dir / "mean_regret.csv");
  means << "allocator,environment,T,mean_static_regret\n";
  for (const AllocatorFit& f : result.fits) {
    for (const auto& [t, regret] : f.mean_points) {
      means << f.allocator << ',' << f.environment << ',' << format_number(t) << ',' << format_number(regret) << '\n';
    }
    out << "slope: allocator=" << f.allocator << " environment=" << f.environment;
    if (f.fit) {
      slopes << f.allocator << ',' << f.environment << ',' << format_number(f.fit->exponent) << ','
             << format_number(f.fit->coefficient) << ',' << format_number(f.fit->r_squared) << ",\n";
      out << " p=" << std::setprecision(4) << f.fit->exponent << " c=" << f.fit->coefficient
          << " r2=" << f.fit->r_squared << '\n';
    } else {
      slopes << f.allocator << ',' << f.environment << ",,,," << '"' << f.error << '"' << '\n';
      out << " fit-failed: " << f.error << '\n';
    }
  }
  return kOk;
}

int cmd_topology(const Invocation& inv, std::ostream& out) {
  const ExperimentConfig config = prepare_config(inv);
  check_assumptions(inv, config);
  const TopologySweepResult result = topology_sweep(config, resolve_workers(inv), run_options(inv));
  const fs::path dir(inv.out_dir);
  write_results(dir, result.rows);

  auto table = open_out(dir / "topology.csv");
  table << "topology,n,m_directed,m_undirected,d_max,kappa,cost_units,mean_static_regret,mean_cost_product,"
           "constraint_violation\n";
  out << std::left << std::setw(20) << "topology" << std::setw(6) << "m" << std::setw(7) << "d_max" << std::setw(7)
      << "kappa" << std::setw(7) << "units" << std::setw(16) << "mean_regret" << std::setw(18) << "mean_cost_product"
      << "constraints\n";
  for (const TopologySummary& s : result.summaries) {
    table << s.topology << ',' << config.graph.n << ',' << s.stats.m_directed << ',' << s.stats.m_undirected
          << ',' << s.stats.d_max << ',' << s.stats.kappa << ',' << s.cost_units << ','
          << format_number(s.mean_static_regret) << ',' << format_number(s.mean_cost_product) << ','
          << (s.constraint_violation ? "true" : "false") << '\n';
    out << std::left << std::setw(20) << s.topology << std::setw(6) << s.stats.m_directed << std::setw(7)
        << s.stats.d_max << std::setw(7) << s.stats.kappa << std::setw(7) << s.cost_units << std::setw(16)
        << std::setprecision(6) << s.mean_static_regret << std::setw(18) << s.mean_cost_product
        << (s.constraint_violation ? "VIOLATION" : "ok") << '\n';
  }
  return kOk;
}

int cmd_truthfulness(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = prepare_config(inv);
  check_assumptions(inv, config);
  const TruthfulnessStudy study = truthfulness_study(config, resolve_workers(inv), run_options(inv));
  for (const std::string& w : study.warnings) err << "warning: " << w << '\n';
  const fs::path dir(inv.out_dir);
  write_results(dir, study.rows);
  auto series = open_out(dir / "truthfulness.csv");
  series << "T,mean_gap,gap_sqrtT_over_lnT\n";
  for (const TruthfulnessPoint& p : study.points) {
    series << p.horizon << ',' << format_number(p.mean_gap) << ',' << format_number(p.normalized) << '\n';
    out << "gap: T=" << p.horizon << " mean_gap=" << format_number(p.mean_gap)
        << " normalized=" << format_number(p.normalized) << '\n';
  }
  out << "verdict: decreasing=" << (study.decreasing ? "yes" : "no")
      << " normalized_spread=" << format_number(study.normalized_spread)
      << " rate_consistent=" << (study.rate_consistent ? "yes" : "no") << '\n';
  return kOk;
}

int cmd_validate(const Invocation& inv, std::ostream& out) {
  const ExperimentConfig config = prepare_config(inv);
  std::vector<std::string> violations;
  for (const InteractionGraph& g : graphs_for(inv, config)) {
    const ValidationReport report = validate_assumptions(g);
    const TopologyStats s = stats(g);
    out << "graph " << g.label() << ": n=" << g.n() << " lambda=" << format_number(g.lambda())
        << " lambda*N=" << format_number(report.lambda_n) << " (spectral proxy "
        << (report.spectral_proxy_ok ? "<= 1/2" : "> 1/2") << ") m_directed=" << s.m_directed
        << " m_undirected=" << s.m_undirected << " d_max=" << s.d_max << " kappa=" << s.kappa << '\n';
    for (const std::string& v : report.violations) {
      out << "  violation: " << v << '\n';
      violations.push_back(g.label() + ": " + v);
    }
    for (const std::string& note : report.notes) out << "  note: " << note << '\n';
  }

  auto describe_env = [&out](const std::string& where, const EnvironmentSpec& e) {
    out << where << ": kind=" << to_string(e.kind) << " values in [" << format_number(e.value_low) << ", "
        << format_number(e.value_high) << "]";
    if (e.kind == EnvironmentKind::InteractionDominant) out << " delta=" << format_number(e.noise_amplitude);
    if (e.kind == EnvironmentKind::BoundedDrift) out << " variation_budget=" << format_number(e.variation_budget);
    out << '\n';
  };
  describe_env("environment", config.environment);

  const std::size_t n = config.graph.n;
  for (std::size_t k = 0; k < config.allocators.size(); ++k) {
    const AllocatorSpec& a = config.allocators[k];
    const std::string where = "allocators[" + std::to_string(k) + "]";
    out << where << ": " << to_string(a.kind) << '\n';
    if (a.environment) describe_env("  environment", *a.environment);
    if (a.kind == AllocatorKind::Competitive) {
      if (a.competitive.anytime) out << "  note: anytime learning rate sqrt(ln N / t) deviates from the fixed-horizon default\n";
      if (a.competitive.learning_rate) {
        for (std::size_t t : config.horizons) {
          const double def = default_learning_rate(n, t);
          if (std::abs(*a.competitive.learning_rate - def) > 1e-12 * def) {
            out << "  note: learning_rate " << format_number(*a.competitive.learning_rate) << " differs from sqrt(ln N / T) = "
                << format_number(def) << " at T=" << t << '\n';
          }
        }
      }
    }
    if (a.kind == AllocatorKind::Gated) {
      if (a.gated.base_step != 1.0 || a.gated.step_exponent != -1.0 / 3.0) {
        out << "  note: gated step " << format_number(a.gated.base_step) << " * t^" << format_number(a.gated.step_exponent)
            << " differs from the default t^(-1/3)\n";
      }
    }
  }
  if (violations.empty()) {
    out << "all assumptions satisfied\n";
    return kOk;
  }
  out << "validation failed: " << violations.size() << " violation(s)\n";
  return kValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online allocation with endogenous costs: simulate, sweep and validate"};
  app.require_subcommand(1);
  Invocation inv;

  auto add_common = [&inv](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "JSON run configuration")->required();
    sub->add_option("--out", inv.out_dir, "output directory");
    sub->add_option("--seed", inv.seed, "override the seed list with one seed");
    sub->add_option("--horizon", inv.horizon, "override the horizon list with one T");
    sub->add_option("--allocator", inv.allocator, "uniform | gated | competitive");
    sub->add_option("--topology", inv.topology, "topology override");
    sub->add_option("--workers", inv.workers, "worker threads (default: ENDOCOST_WORKERS or hardware)");
    sub->add_flag("--trace", inv.trace, "dump per-round trace (run)");
    sub->add_flag("--allow-unsafe-lambda", inv.allow_unsafe_lambda, "run even if lambda > 1/(2N)");
    sub->add_flag("--wall-clock", inv.wall_clock, "record wall-clock seconds (output no longer byte-reproducible)");
    sub->add_flag("-v,--verbose", inv.verbosity, "verbosity");
  };
  for (const char* name : {"run", "sweep", "topology", "truthfulness", "validate"}) {
    add_common(app.add_subcommand(name)->callback([&inv, name] { inv.subcommand = name; }));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kConfig;
  }

  try {
    if (inv.subcommand == "run") return cmd_run(inv, out);
    if (inv.subcommand == "sweep") return cmd_sweep(inv, out);
    if (inv.subcommand == "topology") return cmd_topology(inv, out);
    if (inv.subcommand == "truthfulness") return cmd_truthfulness(inv, out, err);
    if (inv.subcommand == "validate") return cmd_validate(inv, out);
    err << "error: usage: unknown subcommand\n";
    return kConfig;
  } catch (const ConfigFailure& e) {
    err << "error: config: " << e.message << '\n';
    return kConfig;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace endocost::cli
