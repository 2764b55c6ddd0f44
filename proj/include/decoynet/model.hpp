// Physical resource model: nodes, microservices, resource requests and the
// feasibility of decoy allocations against the per-node deception budget.
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace decoynet {

// Relative tolerance used by every resource comparison, chosen to absorb
// floating-point accumulation over per-node sums.
inline constexpr double kResourceTol = 1e-9;

// lhs <= rhs within the relative tolerance.
inline bool leq_tol(double lhs, double rhs) {
  return lhs <= rhs + kResourceTol * std::max(1.0, std::fabs(rhs));
}

// floor(q) with relative slack, so 6.999999999 counts as 7.
inline long long floor_tol(double q) {
  return static_cast<long long>(
      std::floor(q + kResourceTol * std::max(1.0, std::fabs(q))));
}

struct ResourcePair {
  double cpu = 0.0;
  double ram = 0.0;
};

struct Vulnerability {
  double em = 0.0;   // exploitability metric
  double ecm = 0.0;  // exploit code maturity
};

struct ComputeNode {
  std::string id;
  double cpu_capacity = 0.0;
  double ram_capacity = 0.0;
};

struct Microservice {
  std::string id;
  double cpu_request = 0.0;
  double ram_request = 0.0;
  std::string node;
  std::vector<Vulnerability> vulnerabilities;

  ResourcePair request() const { return {cpu_request, ram_request}; }
};

struct DeploymentPlan {
  std::vector<ComputeNode> nodes;
  std::vector<Microservice> microservices;
  double delta = 0.0;  // share of per-node slack reserved for decoys

  const ComputeNode* find_node(const std::string& id) const;
  const Microservice* find_microservice(const std::string& id) const;
};

// Decoy counts per microservice id. Zero entries are allowed and ignored.
struct DecoyAllocation {
  std::map<std::string, int> counts;

  int count_of(const std::string& id) const {
    auto it = counts.find(id);
    return it == counts.end() ? 0 : it->second;
  }
  void add(const std::string& id, int n = 1) { counts[id] += n; }
  int total() const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Structural checks (unique ids, positive capacities/requests, resolvable
// assignments, non-empty vulnerability sets) plus the capacity conditions:
// per node and resource kind the assigned requests must not exceed capacity,
// and every microservice must be assigned to exactly one existing node.
ValidationReport validate_deployment(const DeploymentPlan& plan);

// Unused capacity of one node given the current assignment.
ResourcePair available_resources(const DeploymentPlan& plan, const std::string& node_id);

// How many additional decoys of `request` fit into `budget`.
int max_decoys_for(const ResourcePair& budget, const ResourcePair& request);

// Decoys of microservice m deployable on its node within delta * slack,
// taking the minimum over both resource kinds.
int max_deployable_decoys(const DeploymentPlan& plan, const std::string& microservice_id);

// True iff for every node and both resource kinds the decoys co-located there
// fit into delta * slack. Decoys are pinned to their origin's node, so the
// co-location constraints hold by construction.
bool check_allocation_feasible(const DeploymentPlan& plan, const DecoyAllocation& x);

nlohmann::json plan_to_json(const DeploymentPlan& plan);
DeploymentPlan plan_from_json(const nlohmann::json& j);

}  // namespace decoynet
