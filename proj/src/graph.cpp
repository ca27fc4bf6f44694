#include "endocost/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "endocost/error.hpp"

namespace endocost {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_size(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) {
    throw Error(ErrorKind::InvalidSize, std::string(what) + " requires n >= " + std::to_string(minimum) +
                                            ", got " + std::to_string(n));
  }
}

bool is_connected(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return true;
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < n; ++w) {
      if (adj[u][w] && !seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

// Edmonds-Karp on a unit-capacity undirected graph.
std::size_t max_flow(const std::vector<std::vector<bool>>& adj, std::size_t source, std::size_t sink) {
  const std::size_t n = adj.size();
  std::vector<std::vector<int>> residual(n, std::vector<int>(n, 0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t w = 0; w < n; ++w) residual[u][w] = adj[u][w] ? 1 : 0;

  std::size_t flow = 0;
  std::vector<std::size_t> parent(n);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  while (true) {
    std::fill(parent.begin(), parent.end(), kNone);
    parent[source] = source;
    std::queue<std::size_t> frontier;
    frontier.push(source);
    while (!frontier.empty() && parent[sink] == kNone) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t w = 0; w < n; ++w) {
        if (residual[u][w] > 0 && parent[w] == kNone) {
          parent[w] = u;
          frontier.push(w);
        }
      }
    }
    if (parent[sink] == kNone) break;
    for (std::size_t w = sink; w != source; w = parent[w]) {
      --residual[parent[w]][w];
      ++residual[w][parent[w]];
    }
    ++flow;
  }
  return flow;
}

}  // namespace

InteractionGraph::InteractionGraph(Eigen::MatrixXd weights, double lambda, std::string label)
    : weights_(std::move(weights)), lambda_(lambda), label_(std::move(label)) {
  if (weights_.rows() != weights_.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "interaction matrix must be square");
  }
  require_size(n(), 2, "interaction graph");
  if (!weights_.allFinite()) throw Error(ErrorKind::NonFinite, "interaction matrix has non-finite entries");
  if (!std::isfinite(lambda_) || lambda_ < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be finite and >= 0");
  }

  // Row-major scan yields lexicographic order directly.
  row_offsets_.reserve(n() + 1);
  for (std::size_t i = 0; i < n(); ++i) {
    row_offsets_.push_back(edges_.size());
    for (std::size_t j = 0; j < n(); ++j) {
      const double w = weight(i, j);
      if (w != 0.0) edges_.push_back(Edge{i, j, w});
    }
  }
  row_offsets_.push_back(edges_.size());
}

std::span<const Edge> InteractionGraph::out_edges(std::size_t i) const {
  if (i >= n()) throw Error(ErrorKind::OutOfRange, "module index out of range");
  return std::span<const Edge>(edges_).subspan(row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]);
}

InteractionGraph InteractionGraph::with_lambda(double lambda) const {
  return InteractionGraph(weights_, lambda, label_);
}

InteractionGraph build_full(std::size_t n, double w_coop, double w_comp, double lambda) {
  require_size(n, 2, "full graph");
  if (w_coop == 0.0 || w_comp == 0.0) {
    throw Error(ErrorKind::InvalidWeight, "full graph weights must be nonzero");
  }
  Eigen::MatrixXd w(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(idx(i), idx(j)) = ((i + j) % 2 == 0) ? w_coop : w_comp;
  w.diagonal().setZero();
  return InteractionGraph(std::move(w), lambda, "full");
}

InteractionGraph build_generalized_wuxing(std::size_t n, double lambda, double w_sheng, double w_ke) {
  require_size(n, 5, "generalized Wuxing");
  if (!(w_sheng > 0.0)) throw Error(ErrorKind::InvalidWeight, "sheng weight must be > 0");
  if (!(w_ke < 0.0)) throw Error(ErrorKind::InvalidWeight, "ke weight must be < 0");
  const std::size_t chord = n / 2;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    w(idx(i), idx((i + 1) % n)) = w_sheng;
    w(idx(i), idx((i + chord) % n)) = w_ke;
  }
  return InteractionGraph(std::move(w), lambda, n == 5 ? "wuxing" : "generalized_wuxing");
}

InteractionGraph build_wuxing(double lambda, double w_sheng, double w_ke) {
  return build_generalized_wuxing(5, lambda, w_sheng, w_ke);
}

InteractionGraph build_ring(std::size_t n, double lambda, double w) {
  require_size(n, 3, "ring");
  if (!(w > 0.0)) throw Error(ErrorKind::InvalidWeight, "ring weight must be > 0");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    m(idx(i), idx((i + 1) % n)) = w;
    m(idx((i + 1) % n), idx(i)) = -w;
  }
  return InteractionGraph(std::move(m), lambda, "ring");
}

InteractionGraph build_star(std::size_t n, double lambda, double w) {
  require_size(n, 3, "star");
  if (w == 0.0) throw Error(ErrorKind::InvalidWeight, "star weight must be nonzero");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (std::size_t j = 1; j < n; ++j) {
    m(0, idx(j)) = w;
    m(idx(j), 0) = w;
  }
  return InteractionGraph(std::move(m), lambda, "star");
}

InteractionGraph build_random_sparse(std::size_t n, std::size_t m_target, double lambda,
                                     std::uint64_t seed, double w) {
  require_size(n, 2, "random sparse graph");
  if (m_target > n * (n - 1)) {
    throw Error(ErrorKind::InvalidArgument, "m_target exceeds n(n-1)");
  }
  if (!(w > 0.0)) throw Error(ErrorKind::InvalidWeight, "random sparse weight magnitude must be > 0");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int attempt = 0; attempt < kRandomSparseRetries; ++attempt) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(idx(n), idx(n));
    for (std::size_t k = 0; k < m_target; ++k) {
      m(idx(pairs[k].first), idx(pairs[k].second)) = coin(rng) ? w : -w;
    }
    InteractionGraph g(std::move(m), lambda, "random_sparse");
    const TopologyStats s = stats(g);
    if (s.connected && s.has_coop_and_comp_per_vertex) return g;
  }
  throw Error(ErrorKind::ConstructionFailed,
              "random sparse graph: no connected, sign-balanced sample within " +
                  std::to_string(kRandomSparseRetries) + " retries");
}

std::vector<std::vector<bool>> undirected_adjacency(const InteractionGraph& g) {
  const std::size_t n = g.n();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const Edge& e : g.edges()) {
    if (e.from == e.to) continue;
    adj[e.from][e.to] = true;
    adj[e.to][e.from] = true;
  }
  return adj;
}

std::size_t edge_connectivity(const std::vector<std::vector<bool>>& adjacency) {
  const std::size_t n = adjacency.size();
  if (n < 2 || !is_connected(adjacency)) return 0;
  // Some global min cut separates vertex 0 from some t.
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t t = 1; t < n; ++t) best = std::min(best, max_flow(adjacency, 0, t));
  return best;
}

TopologyStats stats(const InteractionGraph& g) {
  const std::size_t n = g.n();
  const auto adj = undirected_adjacency(g);

  TopologyStats s;
  s.m_directed = g.m_directed();
  std::vector<bool> has_coop(n, false), has_comp(n, false);
  for (const Edge& e : g.edges()) {
    if (e.from == e.to) continue;
    auto& mark = e.weight > 0.0 ? has_coop : has_comp;
    mark[e.from] = true;
    mark[e.to] = true;
  }
  s.has_coop_and_comp_per_vertex = true;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t degree = 0;
    for (std::size_t j = 0; j < n; ++j) degree += adj[i][j] ? 1 : 0;
    s.d_max = std::max(s.d_max, degree);
    for (std::size_t j = i + 1; j < n; ++j) s.m_undirected += adj[i][j] ? 1 : 0;
    if (!has_coop[i] || !has_comp[i]) s.has_coop_and_comp_per_vertex = false;
  }
  s.connected = is_connected(adj);
  s.kappa = edge_connectivity(adj);
  return s;
}

ValidationReport validate_assumptions(const InteractionGraph& g) {
  ValidationReport report;
  const double n = static_cast<double>(g.n());
  const Eigen::MatrixXd& w = g.weights();

  if ((w.diagonal().array() != 0.0).any()) report.violations.emplace_back("nonzero diagonal");
  if ((w.array().abs() > 1.0).any()) report.violations.emplace_back("weight magnitude exceeds 1");
  if (g.lambda() > 1.0 / (2.0 * n)) report.violations.emplace_back("lambda exceeds 1/(2N)");

  report.lambda_n = g.lambda() * n;
  report.spectral_proxy_ok = report.lambda_n <= 0.5;

  if (g.label() == "wuxing" || g.label() == "generalized_wuxing") {
    const TopologyStats s = stats(g);
    if (s.kappa != 4 || s.d_max != 4) {
      report.notes.push_back("generalized Wuxing with N=" + std::to_string(g.n()) + " has d_max=" +
                             std::to_string(s.d_max) + ", kappa=" + std::to_string(s.kappa) +
                             " (claimed value is 4)");
    }
  }
  return report;
}

nlohmann::json to_json(const InteractionGraph& g) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < g.n(); ++i)
    for (std::size_t j = 0; j < g.n(); ++j) entries.push_back(g.weight(i, j));
  return nlohmann::json{{"n", g.n()}, {"lambda", g.lambda()}, {"entries", std::move(entries)}};
}

InteractionGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("graph", "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "n" && key != "lambda" && key != "entries") throw ConfigError("graph." + key, "unknown key");
  }
  if (!j.contains("n") || !j["n"].is_number_unsigned()) throw ConfigError("graph.n", "expected an unsigned integer");
  if (!j.contains("lambda") || !j["lambda"].is_number()) throw ConfigError("graph.lambda", "expected a number");
  if (!j.contains("entries") || !j["entries"].is_array()) throw ConfigError("graph.entries", "expected an array");
  const auto n = j["n"].get<std::size_t>();
  const auto& entries = j["entries"];
  if (entries.size() != n * n) {
    throw ConfigError("graph.entries", "expected " + std::to_string(n * n) + " entries");
  }
  Eigen::MatrixXd w(idx(n), idx(n));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (!entries[k].is_number()) throw ConfigError("graph.entries", "non-numeric entry");
    w(idx(k / n), idx(k % n)) = entries[k].get<double>();
  }
  return InteractionGraph(std::move(w), j["lambda"].get<double>());
}

}  // namespace endocost
