#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace endocost {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// The interaction matrix W together with its coupling strength and the
/// lexicographically sorted list of directed edges {(i, j) : W_ij != 0}.
///
/// Construction only enforces structure (square, n >= 2, finite entries,
/// lambda >= 0). The modelling assumptions (zero diagonal, |W_ij| <= 1,
/// lambda <= 1/(2n)) are reported by validate_assumptions() so that
/// offending graphs can still be built and inspected.
class InteractionGraph {
 public:
  InteractionGraph(Eigen::MatrixXd weights, double lambda, std::string label = "custom");

  std::size_t n() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
  double lambda() const noexcept { return lambda_; }
  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  double weight(std::size_t i, std::size_t j) const {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const std::string& label() const noexcept { return label_; }

  std::span<const Edge> edges() const noexcept { return edges_; }
  // Out-edges of module i, sorted by target.
  std::span<const Edge> out_edges(std::size_t i) const;
  std::size_t m_directed() const noexcept { return edges_.size(); }

  InteractionGraph with_lambda(double lambda) const;

 private:
  Eigen::MatrixXd weights_;
  double lambda_;
  std::string label_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> row_offsets_;
};

struct TopologyStats {
  std::size_t m_directed = 0;
  std::size_t m_undirected = 0;
  std::size_t d_max = 0;
  std::size_t kappa = 0;
  bool has_coop_and_comp_per_vertex = false;
  bool connected = false;

  // Connected, both link types at every vertex, and kappa >= 2.
  bool satisfies_topology_constraints() const noexcept {
    return connected && has_coop_and_comp_per_vertex && kappa >= 2;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  double lambda_n = 0.0;
  bool spectral_proxy_ok = false;

  bool ok() const noexcept { return violations.empty(); }
};

InteractionGraph build_full(std::size_t n, double w_coop, double w_comp, double lambda);
InteractionGraph build_wuxing(double lambda, double w_sheng = 1.0, double w_ke = -1.0);
InteractionGraph build_generalized_wuxing(std::size_t n, double lambda, double w_sheng = 1.0,
                                          double w_ke = -1.0);
InteractionGraph build_ring(std::size_t n, double lambda, double w = 1.0);
InteractionGraph build_star(std::size_t n, double lambda, double w = 1.0);
InteractionGraph build_random_sparse(std::size_t n, std::size_t m_target, double lambda,
                                     std::uint64_t seed, double w = 1.0);

inline constexpr int kRandomSparseRetries = 1000;

// Edge connectivity of an undirected simple graph given as a symmetric
// boolean adjacency matrix, via unit-capacity max-flow from vertex 0.
std::size_t edge_connectivity(const std::vector<std::vector<bool>>& adjacency);

// Underlying undirected simple graph: i ~ j iff W_ij != 0 or W_ji != 0, i != j.
std::vector<std::vector<bool>> undirected_adjacency(const InteractionGraph& g);

TopologyStats stats(const InteractionGraph& g);
ValidationReport validate_assumptions(const InteractionGraph& g);

nlohmann::json to_json(const InteractionGraph& g);
InteractionGraph graph_from_json(const nlohmann::json& j);

}  // namespace endocost
