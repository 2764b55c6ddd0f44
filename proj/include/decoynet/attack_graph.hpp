// Weighted attack graph over microservices (and decoy copies), canonical
// attack paths, path multiplicities and betweenness centrality.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "decoynet/counts.hpp"
#include "decoynet/model.hpp"

namespace decoynet {

struct GraphEdge {
  std::uint32_t to = 0;
  double weight = 0.0;
};

// Directed acyclic graph with positive edge weights. Vertices carry an origin
// index: originals point to themselves, decoy copies to the microservice they
// clone. Out/in edge lists are kept sorted by neighbor id so that every
// traversal is deterministic and "smallest id first" scans terminate early.
class AttackGraph {
 public:
  std::uint32_t add_vertex(const std::string& id);
  std::uint32_t add_vertex_copy(const std::string& id, std::uint32_t origin);
  void add_edge(const std::string& from, const std::string& to, double weight);
  void add_edge(std::uint32_t from, std::uint32_t to, double weight);

  std::size_t vertex_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::string>& vertex_ids() const { return ids_; }
  const std::string& id_of(std::uint32_t v) const { return ids_[v]; }
  std::optional<std::uint32_t> index_of(const std::string& id) const;
  std::uint32_t require_index(const std::string& id) const;

  std::uint32_t origin_of(std::uint32_t v) const { return origin_[v]; }
  bool is_decoy(std::uint32_t v) const { return origin_[v] != v; }
  std::size_t original_count() const;

  std::span<const GraphEdge> out_edges(std::uint32_t v) const {
    return {out_[v].data(), out_[v].size()};
  }
  std::span<const GraphEdge> in_edges(std::uint32_t v) const {
    return {in_[v].data(), in_[v].size()};
  }
  bool has_edge(std::uint32_t from, std::uint32_t to) const;

  // Topological order; throws std::invalid_argument on cycles. Kahn's
  // algorithm taking the smallest vertex id among ready vertices, so the
  // order is a deterministic function of the graph alone.
  std::vector<std::uint32_t> topological_order() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::uint32_t> origin_;
  std::vector<std::vector<GraphEdge>> out_;
  std::vector<std::vector<GraphEdge>> in_;
  std::size_t edge_count_ = 0;
};

struct DagCheckResult {
  bool ok = false;
  std::vector<std::string> cycle;  // witness when !ok, in traversal order
};

DagCheckResult validate_dag(const AttackGraph& g);

// Edge weight into a microservice: sum(em * ecm) / sum(ecm) over the target's
// vulnerability set. Throws std::invalid_argument on an empty set.
double edge_weight(std::span<const Vulnerability> vulns);

using CallEdge = std::pair<std::string, std::string>;

// Builds the weighted attack graph for a deployment:
//  - one edge per call-graph pair (i, j), weighted by j's vulnerabilities;
//  - container-escape edges between co-located pairs with no call edge in
//    either direction, weighted by j's vulnerabilities plus the shared node's
//    virtualization vulnerabilities, oriented along the call graph's global
//    topological order so the result stays acyclic.
AttackGraph build_attack_graph(
    const std::vector<CallEdge>& call_edges, const DeploymentPlan& plan,
    const std::map<std::string, std::vector<Vulnerability>>& node_vulns = {});

// One canonical attack path per ordered reachable vertex pair: a true
// minimum-weight path, ties broken by lexicographic comparison of the vertex
// id sequence. Also records the number of distinct minimum-weight paths per
// pair and classical betweenness centrality for every vertex.
class ApIndex {
 public:
  struct Pair {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    double distance = 0.0;
    PathCount multiplicity = 0;
    std::uint32_t path_begin = 0;  // into path_vertices(), endpoints included
    std::uint32_t path_end = 0;
  };

  const std::vector<Pair>& pairs() const { return pairs_; }
  const std::vector<std::uint32_t>& path_vertices() const { return path_vertices_; }
  std::span<const std::uint32_t> path_of(const Pair& p) const {
    return {path_vertices_.data() + p.path_begin, p.path_end - p.path_begin};
  }

  const std::vector<std::string>& vertex_ids() const { return ids_; }
  std::optional<std::uint32_t> index_of(const std::string& id) const;

  const Pair* find_pair(std::uint32_t src, std::uint32_t dst) const;

  // Pair indices whose canonical path has v strictly interior.
  std::span<const std::uint32_t> pairs_through(std::uint32_t v) const;

  double betweenness_of(std::uint32_t v) const { return betweenness_[v]; }

  friend ApIndex compute_attack_paths(const AttackGraph& g);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<Pair> pairs_;                       // sorted by (src, dst)
  std::vector<std::uint32_t> path_vertices_;      // flattened canonical paths
  std::vector<std::uint32_t> through_offsets_;    // CSR: vertex -> pair ids
  std::vector<std::uint32_t> through_pairs_;
  std::vector<double> betweenness_;
};

ApIndex compute_attack_paths(const AttackGraph& g);

// Classical betweenness centrality of one vertex, both endpoints excluded.
double betweenness(const ApIndex& idx, const std::string& vertex_id);

// JSON: {"vertices": [...], "edges": [{"from","to","w"}]}; call graphs use
// the same shape without "w".
nlohmann::json graph_to_json(const AttackGraph& g);
AttackGraph graph_from_json(const nlohmann::json& j);
nlohmann::json call_graph_to_json(std::span<const std::string> vertices,
                                  std::span<const CallEdge> edges);
std::pair<std::vector<std::string>, std::vector<CallEdge>> call_graph_from_json(
    const nlohmann::json& j);

}  // namespace decoynet
