// Validation oracles: exhaustive minimum-weight path enumeration on small
// augmented graphs, brute-force allocation search, and randomized check
// suites comparing the closed-form objective and the solvers against them.
// Everything here is deliberately independent of the canonical-path index
// that the production objective is built on.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decoynet/attack_graph.hpp"
#include "decoynet/model.hpp"
#include "decoynet/objective.hpp"
#include "decoynet/rng.hpp"

namespace decoynet::oracle {

// All minimum-weight paths between two vertices, as explicit vertex index
// sequences. Throws std::length_error once more than `max_path_nodes` path
// vertices have been materialized.
std::vector<std::vector<std::uint32_t>> minimum_weight_paths(
    const AttackGraph& g, std::uint32_t src, std::uint32_t dst,
    std::size_t max_path_nodes = 1u << 20);

// Expected number of decoy interceptions: over every ordered pair of
// augmented vertices (originals and copies alike), enumerate that pair's
// minimum-weight paths and average the count of strictly interior decoy
// vertices; return the sum over pairs. Refuses graphs with more than
// `max_original_vertices` originals.
double expected_interceptions(const AttackGraph& g, const DecoyAllocation& x,
                              std::size_t max_original_vertices = 12);

struct BruteForceResult {
  DecoyAllocation x;
  double objective = 0.0;
  std::uint64_t candidates = 0;  // feasible allocations enumerated
};

// Enumerates every feasible allocation (optionally capped per microservice)
// and returns the best by objective, then fewest decoys, then lexicographically
// smallest counts. Throws std::length_error past `max_candidates`.
BruteForceResult brute_force_best_allocation(const DeploymentPlan& plan,
                                             const ObjectiveContext& ctx,
                                             int per_microservice_cap = -1,
                                             std::uint64_t max_candidates = 50'000'000);

// Enumerates feasible allocations only (no objective), for suite sizing.
std::uint64_t count_feasible_allocations(const DeploymentPlan& plan,
                                         int per_microservice_cap,
                                         std::uint64_t stop_after);

struct SmallInstance {
  DeploymentPlan plan;
  AttackGraph graph;  // weights drawn per edge, continuous, so ties have measure zero
};

// Deterministic random instance: a DAG over `vertex_count` microservices with
// per-edge continuous weights, spread over a few nodes with enough headroom
// that the plan validates.
SmallInstance random_small_instance(SplitMix64& rng, int vertex_count,
                                    double edge_probability, int node_count,
                                    double delta_lo, double delta_hi);

struct SuiteReport {
  int trials = 0;
  int failures = 0;
  std::uint64_t checks = 0;     // individual comparisons performed
  double max_rel_err = 0.0;     // objective suite only
  double seconds = 0.0;
  std::vector<std::string> notes;  // one line per failure, truncated
  bool ok() const { return failures == 0; }
};

// Closed-form objective vs. exhaustive interception oracle over every
// feasible allocation with per-component cap `x_cap`.
SuiteReport run_objective_oracle_suite(int trials, int max_vertices, std::uint64_t seed,
                                       int x_cap = 2, double rel_tol = 1e-9,
                                       std::uint64_t max_feasible_per_instance = 1200);

// Branch-and-bound exact solver vs. brute-force enumeration.
SuiteReport run_exhaustive_optimality_suite(int trials, std::uint64_t seed,
                                            int max_vertices = 8,
                                            int max_total_decoys = 10);

// Per-node two-resource knapsack vs. exhaustive enumeration.
SuiteReport run_knapsack_exactness_suite(int trials, std::uint64_t seed,
                                         int max_values_per_item = 10);

}  // namespace decoynet::oracle
