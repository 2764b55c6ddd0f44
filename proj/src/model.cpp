#include "decoynet/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace decoynet {

const ComputeNode* DeploymentPlan::find_node(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const Microservice* DeploymentPlan::find_microservice(const std::string& id) const {
  for (const auto& m : microservices) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

int DecoyAllocation::total() const {
  int t = 0;
  for (const auto& [id, c] : counts) t += c;
  return t;
}

ValidationReport validate_deployment(const DeploymentPlan& plan) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  std::unordered_set<std::string> node_ids;
  for (const auto& n : plan.nodes) {
    if (!node_ids.insert(n.id).second) fail("duplicate node id: " + n.id);
    if (n.cpu_capacity <= 0.0 || n.ram_capacity <= 0.0)
      fail("node " + n.id + ": capacities must be strictly positive");
  }

  std::unordered_set<std::string> ms_ids;
  std::unordered_map<std::string, ResourcePair> used;
  for (const auto& m : plan.microservices) {
    if (!ms_ids.insert(m.id).second) fail("duplicate microservice id: " + m.id);
    if (m.cpu_request <= 0.0 || m.ram_request <= 0.0)
      fail("microservice " + m.id + ": requests must be strictly positive");
    if (m.vulnerabilities.empty())
      fail("microservice " + m.id + ": vulnerability set is empty");
    if (m.node.empty()) {
      fail("microservice " + m.id + ": no node assignment");
      continue;
    }
    if (!node_ids.contains(m.node)) {
      fail("microservice " + m.id + ": unknown node " + m.node);
      continue;
    }
    auto& u = used[m.node];
    u.cpu += m.cpu_request;
    u.ram += m.ram_request;
  }

  if (plan.delta < 0.0 || plan.delta > 1.0)
    fail("delta must lie in [0,1]");

  for (const auto& n : plan.nodes) {
    auto it = used.find(n.id);
    if (it == used.end()) continue;
    if (!leq_tol(it->second.cpu, n.cpu_capacity))
      fail("node " + n.id + ": cpu requests exceed capacity");
    if (!leq_tol(it->second.ram, n.ram_capacity))
      fail("node " + n.id + ": ram requests exceed capacity");
  }
  return report;
}

ResourcePair available_resources(const DeploymentPlan& plan, const std::string& node_id) {
  const ComputeNode* node = plan.find_node(node_id);
  if (node == nullptr) throw std::invalid_argument("unknown node id: " + node_id);
  ResourcePair free{node->cpu_capacity, node->ram_capacity};
  for (const auto& m : plan.microservices) {
    if (m.node == node_id) {
      free.cpu -= m.cpu_request;
      free.ram -= m.ram_request;
    }
  }
  free.cpu = std::max(free.cpu, 0.0);
  free.ram = std::max(free.ram, 0.0);
  return free;
}

int max_decoys_for(const ResourcePair& budget, const ResourcePair& request) {
  if (request.cpu <= 0.0 || request.ram <= 0.0)
    throw std::invalid_argument("decoy request must be strictly positive");
  long long by_cpu = floor_tol(budget.cpu / request.cpu);
  long long by_ram = floor_tol(budget.ram / request.ram);
  long long d = std::min(by_cpu, by_ram);
  return d < 0 ? 0 : static_cast<int>(d);
}

int max_deployable_decoys(const DeploymentPlan& plan, const std::string& microservice_id) {
  const Microservice* m = plan.find_microservice(microservice_id);
  if (m == nullptr)
    throw std::invalid_argument("unknown microservice id: " + microservice_id);
  ResourcePair slack = available_resources(plan, m->node);
  ResourcePair budget{plan.delta * slack.cpu, plan.delta * slack.ram};
  return max_decoys_for(budget, m->request());
}

bool check_allocation_feasible(const DeploymentPlan& plan, const DecoyAllocation& x) {
  std::unordered_map<std::string, ResourcePair> load;  // node -> decoy demand
  for (const auto& [id, count] : x.counts) {
    if (count == 0) continue;
    if (count < 0) throw std::invalid_argument("negative decoy count for " + id);
    const Microservice* m = plan.find_microservice(id);
    if (m == nullptr)
      throw std::invalid_argument("allocation references unknown microservice: " + id);
    auto& l = load[m->node];
    l.cpu += count * m->cpu_request;
    l.ram += count * m->ram_request;
  }
  for (const auto& [node_id, demand] : load) {
    ResourcePair slack = available_resources(plan, node_id);
    if (!leq_tol(demand.cpu, plan.delta * slack.cpu)) return false;
    if (!leq_tol(demand.ram, plan.delta * slack.ram)) return false;
  }
  return true;
}

nlohmann::json plan_to_json(const DeploymentPlan& plan) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : plan.nodes) {
    j["nodes"].push_back({{"id", n.id}, {"cpu", n.cpu_capacity}, {"ram", n.ram_capacity}});
  }
  j["microservices"] = nlohmann::json::array();
  for (const auto& m : plan.microservices) {
    nlohmann::json vulns = nlohmann::json::array();
    for (const auto& v : m.vulnerabilities) {
      vulns.push_back({{"em", v.em}, {"ecm", v.ecm}});
    }
    j["microservices"].push_back({{"id", m.id},
                                  {"cpu", m.cpu_request},
                                  {"ram", m.ram_request},
                                  {"node", m.node},
                                  {"vulns", std::move(vulns)}});
  }
  j["delta"] = plan.delta;
  return j;
}

DeploymentPlan plan_from_json(const nlohmann::json& j) {
  DeploymentPlan plan;
  for (const auto& n : j.at("nodes")) {
    plan.nodes.push_back({n.at("id").get<std::string>(), n.at("cpu").get<double>(),
                          n.at("ram").get<double>()});
  }
  for (const auto& m : j.at("microservices")) {
    Microservice ms;
    ms.id = m.at("id").get<std::string>();
    ms.cpu_request = m.at("cpu").get<double>();
    ms.ram_request = m.at("ram").get<double>();
    ms.node = m.at("node").get<std::string>();
    for (const auto& v : m.at("vulns")) {
      ms.vulnerabilities.push_back({v.at("em").get<double>(), v.at("ecm").get<double>()});
    }
    plan.microservices.push_back(std::move(ms));
  }
  plan.delta = j.at("delta").get<double>();
  return plan;
}

}  // namespace decoynet
