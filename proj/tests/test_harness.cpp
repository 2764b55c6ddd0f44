#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "decoynet/harness.hpp"
#include "decoynet/rng.hpp"

using namespace decoynet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("decoynet_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("preferential attachment edge count and orientation") {
  Topology topo = generate_topology(100, 2, 11);
  CHECK(topo.vertices.size() == 100);
  CHECK(topo.edges.size() == 196);  // 2 * (100 - 2)

  // every edge runs from an earlier vertex to a later one
  std::map<std::string, int> position;
  for (int i = 0; i < 100; ++i) position[topo.vertices[i]] = i;
  std::map<std::string, int> in_degree;
  for (const auto& [from, to] : topo.edges) {
    CHECK(position.at(from) < position.at(to));
    ++in_degree[to];
  }
  // each vertex past the seed set joins with exactly `attach` incoming edges
  for (int i = 2; i < 100; ++i) CHECK(in_degree[topo.vertices[i]] == 2);
}

TEST_CASE("attach = 1 yields a forest and the generator is deterministic") {
  Topology tree = generate_topology(40, 1, 5);
  CHECK(tree.edges.size() == 39);
  std::map<std::string, int> in_degree;
  for (const auto& [from, to] : tree.edges) ++in_degree[to];
  for (const auto& [id, deg] : in_degree) CHECK(deg == 1);

  Topology again = generate_topology(40, 1, 5);
  CHECK(again.edges == tree.edges);
  Topology other = generate_topology(40, 1, 6);
  CHECK(other.edges != tree.edges);

  CHECK_THROWS_AS((void)generate_topology(2, 2, 1), std::invalid_argument);
}

TEST_CASE("vulnerability sampling respects the documented ranges") {
  VulnCatalog catalog = sample_vulnerabilities(50, 5, 3, 5, 77);
  REQUIRE(catalog.per_microservice.size() == 50);
  REQUIRE(catalog.per_node.size() == 5);
  const std::set<double> ecm_levels{0.91, 0.94, 0.97, 1.0};
  auto check_set = [&](const std::vector<Vulnerability>& vulns) {
    CHECK(vulns.size() >= 3);
    CHECK(vulns.size() <= 5);
    for (const auto& v : vulns) {
      CHECK(v.em >= 0.1);
      CHECK(v.em <= 3.9);
      CHECK(ecm_levels.count(v.ecm) == 1);
      std::vector<Vulnerability> single{v};
      CHECK(edge_weight(single) > 0.0);
    }
  };
  for (const auto& vulns : catalog.per_microservice) check_set(vulns);
  for (const auto& vulns : catalog.per_node) check_set(vulns);
}

TEST_CASE("trace ingestion") {
  fs::path dir = fresh_dir("traces");
  fs::path good = dir / "good.csv";
  {
    std::ofstream out(good);
    out << "container_id,cpu_request,ram_request\n";
    out << "c1,0.5,0.25\n";
    out << "c2,1.5,0.125\n";  // cpu clamps to 1.0
    out << "c3,0.03125,0.0625\n";
  }
  auto pool = ingest_traces(good.string());
  REQUIRE(pool.size() == 3);
  CHECK(pool[0].cpu == 0.5);
  CHECK(pool[1].cpu == 1.0);
  CHECK(pool[2].ram == 0.0625);

  fs::path bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "container_id,cpu_request,ram_request\n";
    out << "c1,0,0.25\n";
  }
  try {
    (void)ingest_traces(bad.string());
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  fs::path empty = dir / "empty.csv";
  { std::ofstream out(empty); out << "container_id,cpu_request,ram_request\n"; }
  CHECK_THROWS_AS((void)ingest_traces(empty.string()), std::runtime_error);

  auto synth_a = ingest_traces("synthetic", 42);
  auto synth_b = ingest_traces("synthetic", 42);
  REQUIRE(synth_a.size() == synth_b.size());
  for (std::size_t i = 0; i < synth_a.size(); ++i) {
    CHECK(synth_a[i].cpu == synth_b[i].cpu);
    CHECK(synth_a[i].cpu >= 0.02);
    CHECK(synth_a[i].cpu <= 0.06);
    CHECK(synth_a[i].ram >= 0.02);
    CHECK(synth_a[i].ram <= 0.06);
  }
}

TEST_CASE("packing opens a node at the fill threshold") {
  std::vector<ResourcePair> tenth{{0.1, 0.1}};
  DeploymentPlan plan = pack_nodes(tenth, 20, 0.7, 1);
  CHECK(plan.nodes.size() == 3);  // seven per node
  plan.delta = 0.3;
  for (auto& ms : plan.microservices) ms.vulnerabilities.push_back({1.0, 1.0});
  CHECK(validate_deployment(plan).ok());

  std::vector<ResourcePair> halves{{0.5, 0.5}};
  CHECK(pack_nodes(halves, 8, 1.0, 1).nodes.size() == 4);  // two per node

  // container-trace-like pool: 25 per node, 500 microservices on 20 nodes
  std::vector<ResourcePair> trace_like{{0.028, 0.028}};
  CHECK(pack_nodes(trace_like, 500, 0.7, 1).nodes.size() == 20);

  std::vector<ResourcePair> oversized{{0.9, 0.9}};
  CHECK_THROWS_AS((void)pack_nodes(oversized, 3, 0.7, 1), std::runtime_error);
}

TEST_CASE("scenario rows: zero budget, determinism, optimal dominance") {
  ScenarioConfig config;
  config.id = "t";
  config.m_count = 10;
  config.attach = 2;
  config.delta = 0.0;
  config.samples = 1;
  config.master_seed = 9;
  auto rows = run_scenario(config, 0);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    CHECK(row.decoys == 0);
    CHECK(row.metrics.dap_fraction == 0.0);
  }

  config.delta = 0.3;
  config.timing = false;
  auto a = run_scenario(config, 0);
  auto b = run_scenario(config, 0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(raw_csv_line(a[i]) == raw_csv_line(b[i]));
  }

  REQUIRE(a[0].scheme == "optimal");
  REQUIRE(a[0].present);
  CHECK(a[0].exact);
  CHECK(a[0].objective >= a[1].objective);  // heuristic row

  config.optimal_max_m = 5;  // below m_count: row recorded as absent
  auto gated = run_scenario(config, 0);
  CHECK_FALSE(gated[0].present);
  CHECK(raw_csv_line(gated[0]).find("absent") != std::string::npos);
}

TEST_CASE("sweep emits stable csv files") {
  std::vector<ScenarioConfig> configs;
  ScenarioConfig base;
  base.m_count = 12;
  base.attach = 2;
  base.delta = 0.3;
  base.samples = 2;
  base.master_seed = 31;
  base.timing = false;
  base.id = "a";
  configs.push_back(base);
  base.id = "b";
  base.delta = 0.4;
  base.samples = 1;
  configs.push_back(base);

  fs::path dir1 = fresh_dir("sweep1");
  fs::path dir2 = fresh_dir("sweep2");
  run_sweep(configs, {dir1.string(), 1});
  run_sweep(configs, {dir2.string(), 2});  // thread count must not matter

  std::string raw1 = slurp(dir1 / "raw.csv");
  std::string raw2 = slurp(dir2 / "raw.csv");
  CHECK(raw1 == raw2);
  CHECK(slurp(dir1 / "summary.csv") == slurp(dir2 / "summary.csv"));

  // header + (2 + 1) samples x 5 schemes
  CHECK(std::count(raw1.begin(), raw1.end(), '\n') == 1 + 3 * 5);

  // single-sample config has empty ci cells
  std::istringstream summary(slurp(dir1 / "summary.csv"));
  std::string line;
  std::getline(summary, line);  // header
  bool saw_single = false;
  while (std::getline(summary, line)) {
    if (line.rfind("b,", 0) == 0) {
      saw_single = true;
      CHECK(line.find(",,") != std::string::npos);
    }
  }
  CHECK(saw_single);
}

TEST_CASE("sweep config parsing") {
  auto j = nlohmann::json::parse(R"({
    "seed": 7, "samples": 3, "attach": 2, "timing": false,
    "configs": [ {"m": 100, "delta": 0.3}, {"id": "big", "m": 200, "delta": 0.4, "samples": 1} ]
  })");
  SweepSpec spec = sweep_from_json(j);
  REQUIRE(spec.configs.size() == 2);
  CHECK(spec.configs[0].id == "cfg0");
  CHECK(spec.configs[0].samples == 3);
  CHECK(spec.configs[0].master_seed == 7);
  CHECK_FALSE(spec.configs[0].timing);
  CHECK(spec.configs[1].id == "big");
  CHECK(spec.configs[1].samples == 1);
  CHECK(spec.configs[1].delta == 0.4);
}

TEST_CASE("csv doubles are shortest-round-trip formatted") {
  CHECK(format_csv_double(0.3) == "0.3");
  CHECK(format_csv_double(0.0) == "0");
  CHECK(format_csv_double(1.0 / 3) == "0.3333333333333333");
}
