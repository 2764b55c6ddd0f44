// The five decoy allocation schemes: certified branch-and-bound for the exact
// nonlinear program, the greedy heuristic, the linear (interaction-blind)
// scheme, the vulnerability-driven sidecar baseline and the random baseline.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoynet/model.hpp"
#include "decoynet/objective.hpp"

namespace decoynet {

struct SearchLimits {
  std::uint64_t max_nodes = 50'000'000;  // branch-and-bound tree nodes
  double max_seconds = 300.0;
};

struct AllocationOutcome {
  DecoyAllocation x;
  double objective = 0.0;  // objective_value(ctx, x), comparable across schemes
  double wall_time_s = 0.0;
  std::string scheme;
  bool exact = false;  // true only when optimality is certified
};

// Exact maximization of the nonlinear objective by depth-first
// branch-and-bound. Branches on microservices in decreasing initial-gain
// order, values high to low; the bound evaluates the objective at the
// componentwise cap each remaining microservice could still reach on its
// node's leftover budget, which is valid by monotonicity. Starts from the
// better of the all-zero allocation and the heuristic's. `exact` reports
// whether the search ran to completion within the limits.
AllocationOutcome solve_optimal(const DeploymentPlan& plan, const ObjectiveContext& ctx,
                                const SearchLimits& limits = {});

// Per-iteration state of the heuristic, exposed for inspection in tests.
struct HeuristicState {
  std::vector<int> x;                       // decoy counts by vertex index
  std::vector<ResourcePair> node_budget;    // remaining delta * slack per node
  std::vector<int> deployable;              // current per-microservice fit
  std::vector<double> running_score;        // incrementally updated pair tallies
  std::vector<std::vector<long long>> interaction_tally;  // per (vertex, endpoint)
};

struct HeuristicIteration {
  std::uint32_t chosen = 0;
  double priority = 0.0;
  double gain = 0.0;
  int deployable = 0;
};

// Greedy loop: seed priorities with betweenness * deployable-count, then after
// each placement re-rank every still-fitting candidate by exact marginal gain
// times its deployable count. Ties go to the smaller microservice id. The
// allocation is maximal by inclusion: the loop only stops when nothing fits.
AllocationOutcome solve_heuristic(const DeploymentPlan& plan, const ObjectiveContext& ctx,
                                  std::vector<HeuristicIteration>* trace = nullptr,
                                  HeuristicState* final_state = nullptr);

// Maximizes sum x_m * c_m with c_m = number of decoy-free canonical paths
// through m, per-node exact knapsack. Decoys of zero-count microservices are
// then topped up deterministically so the allocation is maximal by inclusion
// (this never changes the knapsack value). The reported objective is still the
// nonlinear one, for cross-scheme comparability.
AllocationOutcome solve_linear(const DeploymentPlan& plan, const ObjectiveContext& ctx);

// Clones the most vulnerable microservices first: priority is
// deployable-count / own-edge-weight, recomputed each placement.
AllocationOutcome solve_sidecar(const DeploymentPlan& plan, const ObjectiveContext& ctx);

// Uniform choice among still-fitting microservices until nothing fits.
AllocationOutcome solve_random(const DeploymentPlan& plan, const ObjectiveContext& ctx,
                               std::uint64_t seed);

// True iff no further decoy of any microservice fits the remaining budget.
bool is_maximal_allocation(const DeploymentPlan& plan, const DecoyAllocation& x);

// Exact two-resource unbounded integer knapsack with per-item caps implied by
// the budget. Values are integral; solved by depth-first branch-and-bound with
// a fractional single-resource relaxation bound.
struct KnapsackItem {
  long long value = 0;
  ResourcePair request;
};
std::vector<int> solve_two_resource_knapsack(std::span<const KnapsackItem> items,
                                             ResourcePair budget);

nlohmann::json outcome_to_json(const AllocationOutcome& outcome);
AllocationOutcome outcome_from_json(const nlohmann::json& j);

}  // namespace decoynet
