// decoynet CLI: scenario generation, single allocations, DAP evaluation,
// sweeps and the oracle self-check suites.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "decoynet/allocators.hpp"
#include "decoynet/attack_graph.hpp"
#include "decoynet/harness.hpp"
#include "decoynet/model.hpp"
#include "decoynet/objective.hpp"
#include "decoynet/oracle.hpp"
#include "decoynet/rng.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::map<std::string, std::vector<decoynet::Vulnerability>> load_node_vulns(
    const std::string& path) {
  std::map<std::string, std::vector<decoynet::Vulnerability>> result;
  if (path.empty()) return result;
  json j = load_json(path);
  for (const auto& [node, vulns] : j.items()) {
    for (const auto& v : vulns) {
      result[node].push_back({v.at("em").get<double>(), v.at("ecm").get<double>()});
    }
  }
  return result;
}

json node_vulns_to_json(const std::vector<std::string>& node_ids,
                        const decoynet::VulnCatalog& catalog) {
  json j = json::object();
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    json vulns = json::array();
    for (const auto& v : catalog.per_node[i]) {
      vulns.push_back({{"em", v.em}, {"ecm", v.ecm}});
    }
    j[node_ids[i]] = std::move(vulns);
  }
  return j;
}

// Accepts either a weighted attack graph ("w" on edges) or a bare call graph,
// which is then combined with the plan the same way the harness does it.
decoynet::AttackGraph load_graph(const std::string& path, const decoynet::DeploymentPlan& plan,
                                 const std::string& node_vulns_path) {
  json j = load_json(path);
  bool weighted = false;
  if (j.contains("edges") && !j.at("edges").empty()) {
    weighted = j.at("edges").front().contains("w");
  }
  if (weighted) {
    return decoynet::graph_from_json(j);
  }
  auto [vertices, edges] = decoynet::call_graph_from_json(j);
  for (const auto& id : vertices) {
    if (plan.find_microservice(id) == nullptr) {
      throw std::runtime_error("graph vertex missing from plan: " + id);
    }
  }
  return decoynet::build_attack_graph(edges, plan, load_node_vulns(node_vulns_path));
}

int cmd_generate(int m, int attach, std::uint64_t seed, const std::string& out,
                 const std::string& plan_out, double delta, double pack_threshold,
                 const std::string& trace, const std::string& node_vulns_out, int vuln_min,
                 int vuln_max) {
  decoynet::Topology topo = decoynet::generate_topology(
      m, attach, decoynet::derive_seed(seed, 0, "topology"));
  write_json(out, decoynet::call_graph_to_json(topo.vertices, topo.edges));
  if (!plan_out.empty()) {
    auto pool = decoynet::ingest_traces(trace, decoynet::derive_seed(seed, 0, "pool"));
    decoynet::DeploymentPlan plan = decoynet::pack_nodes(
        pool, m, pack_threshold, decoynet::derive_seed(seed, 0, "pack"));
    plan.delta = delta;
    decoynet::VulnCatalog catalog = decoynet::sample_vulnerabilities(
        m, static_cast<int>(plan.nodes.size()), vuln_min, vuln_max,
        decoynet::derive_seed(seed, 0, "vulns"));
    for (std::size_t i = 0; i < plan.microservices.size(); ++i) {
      plan.microservices[i].vulnerabilities = catalog.per_microservice[i];
    }
    auto report = decoynet::validate_deployment(plan);
    if (!report.ok()) throw std::runtime_error("generated plan invalid: " + report.violations[0]);
    write_json(plan_out, decoynet::plan_to_json(plan));
    if (!node_vulns_out.empty()) {
      std::vector<std::string> node_ids;
      for (const auto& n : plan.nodes) node_ids.push_back(n.id);
      write_json(node_vulns_out, node_vulns_to_json(node_ids, catalog));
    }
  }
  return 0;
}

int cmd_allocate(const std::string& plan_path, const std::string& graph_path,
                 const std::string& scheme, std::uint64_t seed, const std::string& out,
                 const std::string& node_vulns_path, std::uint64_t max_nodes,
                 double max_seconds) {
  decoynet::DeploymentPlan plan = decoynet::plan_from_json(load_json(plan_path));
  auto report = decoynet::validate_deployment(plan);
  if (!report.ok()) throw std::runtime_error("invalid plan: " + report.violations[0]);
  decoynet::AttackGraph graph = load_graph(graph_path, plan, node_vulns_path);
  decoynet::ApIndex idx = decoynet::compute_attack_paths(graph);
  decoynet::ObjectiveContext ctx = decoynet::ObjectiveContext::from_index(idx);

  decoynet::AllocationOutcome outcome;
  if (scheme == "optimal") {
    decoynet::SearchLimits limits;
    limits.max_nodes = max_nodes;
    limits.max_seconds = max_seconds;
    outcome = decoynet::solve_optimal(plan, ctx, limits);
  } else if (scheme == "heuristic") {
    outcome = decoynet::solve_heuristic(plan, ctx);
  } else if (scheme == "linear") {
    outcome = decoynet::solve_linear(plan, ctx);
  } else if (scheme == "sidecar") {
    outcome = decoynet::solve_sidecar(plan, ctx);
  } else if (scheme == "random") {
    outcome = decoynet::solve_random(plan, ctx, seed);
  } else {
    throw std::runtime_error("unknown scheme: " + scheme);
  }
  write_json(out, decoynet::outcome_to_json(outcome));
  return 0;
}

int cmd_evaluate(const std::string& plan_path, const std::string& graph_path,
                 const std::string& alloc_path, const std::string& node_vulns_path) {
  decoynet::DeploymentPlan plan = decoynet::plan_from_json(load_json(plan_path));
  auto report = decoynet::validate_deployment(plan);
  if (!report.ok()) throw std::runtime_error("invalid plan: " + report.violations[0]);
  decoynet::AttackGraph graph = load_graph(graph_path, plan, node_vulns_path);
  decoynet::AllocationOutcome outcome = decoynet::outcome_from_json(load_json(alloc_path));
  if (!decoynet::check_allocation_feasible(plan, outcome.x)) {
    throw std::runtime_error("allocation is not feasible for this plan");
  }
  decoynet::DapMetrics metrics = decoynet::count_daps(graph, outcome.x);
  std::cout << decoynet::dap_metrics_to_json(metrics).dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads_override) {
  decoynet::SweepSpec spec = decoynet::sweep_from_json(load_json(config_path));
  decoynet::SweepOptions options;
  options.out_dir = out_dir;
  options.threads = threads_override > 0 ? threads_override : spec.threads;
  decoynet::run_sweep(spec.configs, options);
  return 0;
}

void print_report(const std::string& name, const decoynet::oracle::SuiteReport& report) {
  std::cout << (report.ok() ? "[PASS] " : "[FAIL] ") << name << ": " << report.trials
            << " trials, " << report.checks << " checks";
  if (report.max_rel_err > 0.0) std::cout << ", max rel err " << report.max_rel_err;
  std::cout << " (" << report.seconds << " s)\n";
  for (const auto& note : report.notes) std::cout << "       " << note << "\n";
}

int cmd_oracle_check(int m_max, int trials, std::uint64_t seed) {
  auto objective = decoynet::oracle::run_objective_oracle_suite(
      trials, m_max, decoynet::derive_seed(seed, 0, "oracle-objective"));
  print_report("objective vs interception oracle", objective);
  auto optimality = decoynet::oracle::run_exhaustive_optimality_suite(
      trials, decoynet::derive_seed(seed, 0, "oracle-optimality"));
  print_report("exact solver vs brute force", optimality);
  return objective.failures + optimality.failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource-constrained decoy placement over attack graphs"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Generate a call-graph topology");
  int gen_m = 100;
  int gen_attach = 2;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "topo.json";
  std::string gen_plan_out;
  std::string gen_node_vulns_out;
  std::string gen_trace = "synthetic";
  double gen_delta = 0.3;
  double gen_threshold = 0.7;
  int gen_vuln_min = 3;
  int gen_vuln_max = 5;
  generate->add_option("--m", gen_m, "Number of microservices")->required();
  generate->add_option("--attach", gen_attach, "Preferential attachment count");
  generate->add_option("--seed", gen_seed, "Master seed")->required();
  generate->add_option("--out", gen_out, "Topology output path")->required();
  generate->add_option("--plan-out", gen_plan_out, "Also emit a deployment plan here");
  generate->add_option("--delta", gen_delta, "Resource decoy ratio for the plan");
  generate->add_option("--pack-threshold", gen_threshold, "Node fill threshold");
  generate->add_option("--trace", gen_trace, "Trace CSV path or 'synthetic'");
  generate->add_option("--node-vulns-out", gen_node_vulns_out,
                       "Emit per-node virtualization vulnerabilities here");
  generate->add_option("--vuln-min", gen_vuln_min, "Minimum vulnerabilities per asset");
  generate->add_option("--vuln-max", gen_vuln_max, "Maximum vulnerabilities per asset");

  auto* allocate = app.add_subcommand("allocate", "Compute a decoy allocation");
  std::string alloc_plan, alloc_graph, alloc_scheme, alloc_out = "alloc.json";
  std::string alloc_node_vulns;
  std::uint64_t alloc_seed = 0;
  std::uint64_t alloc_max_nodes = decoynet::SearchLimits{}.max_nodes;
  double alloc_max_seconds = decoynet::SearchLimits{}.max_seconds;
  allocate->add_option("--plan", alloc_plan, "Deployment plan JSON")->required();
  allocate->add_option("--graph", alloc_graph, "Call graph or attack graph JSON")->required();
  allocate->add_option("--scheme", alloc_scheme, "optimal|heuristic|linear|sidecar|random")
      ->required();
  allocate->add_option("--seed", alloc_seed, "Seed (random scheme)");
  allocate->add_option("--out", alloc_out, "Allocation output path")->required();
  allocate->add_option("--node-vulns", alloc_node_vulns, "Per-node vulnerabilities JSON");
  allocate->add_option("--max-nodes", alloc_max_nodes, "Branch-and-bound node limit");
  allocate->add_option("--max-seconds", alloc_max_seconds, "Branch-and-bound time limit");

  auto* evaluate = app.add_subcommand("evaluate", "Print DAP metrics for an allocation");
  std::string eval_plan, eval_graph, eval_alloc, eval_node_vulns;
  evaluate->add_option("--plan", eval_plan, "Deployment plan JSON")->required();
  evaluate->add_option("--graph", eval_graph, "Call graph or attack graph JSON")->required();
  evaluate->add_option("--alloc", eval_alloc, "Allocation JSON")->required();
  evaluate->add_option("--node-vulns", eval_node_vulns, "Per-node vulnerabilities JSON");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario sweep");
  std::string sweep_config, sweep_out = "results";
  int sweep_threads = 0;
  sweep->add_option("--config", sweep_config, "Sweep config JSON")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--threads", sweep_threads, "Override worker thread count");

  auto* oracle_check = app.add_subcommand("oracle-check", "Run oracle validation suites");
  int oc_m_max = 10;
  int oc_trials = 50;
  std::uint64_t oc_seed = 1;
  oracle_check->add_option("--m-max", oc_m_max, "Max vertices per random instance");
  oracle_check->add_option("--trials", oc_trials, "Instances per suite");
  oracle_check->add_option("--seed", oc_seed, "Suite seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(gen_m, gen_attach, gen_seed, gen_out, gen_plan_out, gen_delta,
                          gen_threshold, gen_trace, gen_node_vulns_out, gen_vuln_min,
                          gen_vuln_max);
    }
    if (allocate->parsed()) {
      return cmd_allocate(alloc_plan, alloc_graph, alloc_scheme, alloc_seed, alloc_out,
                          alloc_node_vulns, alloc_max_nodes, alloc_max_seconds);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_plan, eval_graph, eval_alloc, eval_node_vulns);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_config, sweep_out, sweep_threads);
    }
    if (oracle_check->parsed()) {
      return cmd_oracle_check(oc_m_max, oc_trials, oc_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
