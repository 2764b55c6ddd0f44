// Decoy-aware betweenness, the allocation objective, incremental marginal
// gains, augmented-graph construction and ground-truth DAP metrics.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "decoynet/attack_graph.hpp"
#include "decoynet/model.hpp"

namespace decoynet {

// Pair and membership data of the decoy-free graph, reduced to what the
// objective needs: pairs whose canonical path has at least one interior
// vertex, the interior vertex list per pair, and per-vertex lists of pairs
// where the vertex sits interior or at an endpoint.
class ObjectiveContext {
 public:
  static ObjectiveContext from_index(const ApIndex& idx);

  std::size_t vertex_count() const { return ids_.size(); }
  std::size_t pair_count() const { return pair_src_.size(); }
  const std::vector<std::string>& vertex_ids() const { return ids_; }
  std::uint32_t require_index(const std::string& id) const;

  std::uint32_t pair_src(std::uint32_t p) const { return pair_src_[p]; }
  std::uint32_t pair_dst(std::uint32_t p) const { return pair_dst_[p]; }
  std::span<const std::uint32_t> pair_interior(std::uint32_t p) const {
    return {interior_vertices_.data() + interior_offsets_[p],
            interior_offsets_[p + 1] - interior_offsets_[p]};
  }
  std::span<const std::uint32_t> pairs_with_interior(std::uint32_t v) const {
    return {vip_pairs_.data() + vip_offsets_[v], vip_offsets_[v + 1] - vip_offsets_[v]};
  }
  std::span<const std::uint32_t> pairs_with_endpoint(std::uint32_t v) const {
    return {vep_pairs_.data() + vep_offsets_[v], vep_offsets_[v + 1] - vep_offsets_[v]};
  }

  // Classical betweenness of the decoy-free graph, carried over from the
  // index; used to seed the heuristic's first round of priorities.
  double betweenness_of(std::uint32_t v) const { return betweenness_[v]; }

  // Dense decoy counts indexed like vertex_ids(); throws on unknown ids.
  std::vector<int> dense_counts(const DecoyAllocation& x) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::uint32_t> pair_src_;
  std::vector<std::uint32_t> pair_dst_;
  std::vector<std::uint32_t> interior_offsets_;
  std::vector<std::uint32_t> interior_vertices_;
  std::vector<std::uint32_t> vip_offsets_;
  std::vector<std::uint32_t> vip_pairs_;
  std::vector<std::uint32_t> vep_offsets_;
  std::vector<std::uint32_t> vep_pairs_;
  std::vector<double> betweenness_;
};

// Betweenness of an original vertex under a decoy allocation: every pair
// whose canonical path passes through it contributes
// (1 + x_src) * (1 + x_dst) / (1 + x_vertex).
double deceptive_betweenness(const ObjectiveContext& ctx, std::span<const int> x,
                             std::uint32_t vertex);
double deceptive_betweenness(const ObjectiveContext& ctx, const DecoyAllocation& x,
                             const std::string& vertex_id);

// sum_m x_m * deceptive_betweenness(m), evaluated in the per-pair factored
// form: sum over pairs of (1+x_s)(1+x_t) * sum_{i interior} x_i/(1+x_i).
// Accumulation order is fixed (pair order), which keeps the value monotone in
// every component even in floating point.
double objective_value(const ObjectiveContext& ctx, std::span<const int> x);
double objective_value(const ObjectiveContext& ctx, const DecoyAllocation& x);

// objective(x + e_vertex) - objective(x), touching only pairs where the
// vertex is interior or an endpoint.
double marginal_gain(const ObjectiveContext& ctx, std::span<const int> x,
                     std::uint32_t vertex);
double marginal_gain(const ObjectiveContext& ctx, const DecoyAllocation& x,
                     const std::string& vertex_id);

// Adds x_m copies per microservice, each duplicating the origin's in/out
// edges and weights. Edges are replicated between whole copy classes, so a
// copy's neighborhood mirrors its origin's exactly. Copy ids are formed as
// "<origin>#d<j>", j starting at 1.
AttackGraph build_augmented_graph(const AttackGraph& g, const DecoyAllocation& x);

struct DapMetrics {
  std::uint64_t total_aps = 0;   // ordered reachable vertex pairs of the augmented graph
  std::uint64_t total_daps = 0;  // pairs whose attack path meets a decoy
  double dap_fraction = 0.0;
  double decoys_per_dap = 0.0;   // mean decoy vertices over deceptive min-weight routes
};

// Ground-truth metrics on the augmented graph. One attack path per ordered
// vertex pair (originals and decoy copies alike); the pair is deceptive when
// a decoy lies anywhere on one of its minimum-weight routes, endpoints
// included. decoys_per_dap averages the decoy count over the individual
// deceptive routes, with equal-cost multiplicity. All counting is by DP in
// exact wide-integer arithmetic; `g` must be decoy-free.
DapMetrics count_daps(const AttackGraph& g, const DecoyAllocation& x);

nlohmann::json dap_metrics_to_json(const DapMetrics& m);

}  // namespace decoynet
