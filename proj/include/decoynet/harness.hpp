// Scenario generation, trace ingestion, sweep execution and CSV emission.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoynet/allocators.hpp"
#include "decoynet/attack_graph.hpp"
#include "decoynet/model.hpp"
#include "decoynet/objective.hpp"

namespace decoynet {

struct ScenarioConfig {
  std::string id = "cfg";
  int m_count = 0;
  int attach = 2;
  double delta = 0.3;
  double pack_threshold = 0.7;
  int samples = 1;
  std::uint64_t master_seed = 0;
  int vuln_count_min = 3;
  int vuln_count_max = 5;
  std::string trace_source = "synthetic";
  int optimal_max_m = 30;  // exact solver skipped (recorded absent) above this
  bool timing = true;      // false zeroes wall times for byte-stable output
};

struct Topology {
  std::vector<std::string> vertices;
  std::vector<CallEdge> edges;
};

// Preferential attachment over m_count vertices: `attach` seed vertices, each
// later vertex attaches to `attach` distinct earlier ones with probability
// proportional to degree + 1; edges point from the earlier vertex to the
// later one, so the call graph is acyclic by construction.
Topology generate_topology(int m_count, int attach, std::uint64_t seed);

struct VulnCatalog {
  std::vector<std::vector<Vulnerability>> per_microservice;
  std::vector<std::vector<Vulnerability>> per_node;
};

// Per microservice and per node: a uniform count in [count_min, count_max] of
// vulnerabilities, em uniform in [0.1, 3.9], ecm uniform over
// {0.91, 0.94, 0.97, 1.0}.
VulnCatalog sample_vulnerabilities(int m_count, int node_count, int count_min,
                                   int count_max, std::uint64_t seed);

// Reads `container_id,cpu_request,ram_request` CSV rows into a request pool;
// values above 1 are clamped to 1, non-positive values are an error carrying
// the line number. The literal source "synthetic" instead draws `pool_size`
// pairs log-uniform in [0.02, 0.06] from `seed`.
std::vector<ResourcePair> ingest_traces(const std::string& source, std::uint64_t seed = 0,
                                        std::size_t pool_size = 4096);

// Samples m_count requests from the pool (with replacement) and fills unit
// nodes first-fit: a new node opens when the next microservice would push
// either resource above pack_threshold. Vulnerabilities and delta are not
// set here; callers attach them before validating.
DeploymentPlan pack_nodes(std::span<const ResourcePair> pool, int m_count,
                          double pack_threshold, std::uint64_t seed);

struct ScenarioRow {
  std::string config_id;
  int sample = 0;
  std::string scheme;
  int m_count = 0;
  double delta = 0.0;
  int nodes = 0;
  bool present = true;  // false: exact solver gated off, row kept as "absent"
  int decoys = 0;
  double decoy_ratio = 0.0;
  DapMetrics metrics;
  double objective = 0.0;
  bool exact = false;
  double wall_time_s = 0.0;
};

std::vector<ScenarioRow> run_scenario(const ScenarioConfig& config, int sample_index);

struct SweepOptions {
  std::string out_dir;
  int threads = 1;
};

// Executes every (config, sample) cell and writes raw.csv plus summary.csv
// (means and 95% normal-approximation confidence half-widths). Output is a
// pure function of the configs; cells may run on several threads but rows are
// assembled in config/sample/scheme order.
void run_sweep(std::span<const ScenarioConfig> configs, const SweepOptions& options);

struct SweepSpec {
  std::vector<ScenarioConfig> configs;
  int threads = 1;
};

SweepSpec sweep_from_json(const nlohmann::json& j);

std::string format_csv_double(double v);
std::string raw_csv_header();
std::string raw_csv_line(const ScenarioRow& row);

}  // namespace decoynet
