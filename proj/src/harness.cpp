#include "decoynet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "decoynet/rng.hpp"

namespace decoynet {

namespace {

std::string indexed_id(const char* prefix, int index, int width) {
  std::string digits = std::to_string(index);
  std::string out = prefix;
  for (int i = static_cast<int>(digits.size()); i < width; ++i) out.push_back('0');
  return out + digits;
}

int id_width(int m_count) {
  int width = 1;
  for (int v = m_count - 1; v >= 10; v /= 10) ++width;
  return width;
}

}  // namespace

Topology generate_topology(int m_count, int attach, std::uint64_t seed) {
  if (attach < 1 || m_count <= attach) {
    throw std::invalid_argument("topology requires m_count > attach >= 1");
  }
  SplitMix64 rng(seed);
  const int width = id_width(m_count);

  Topology topo;
  topo.vertices.reserve(m_count);
  for (int i = 0; i < m_count; ++i) topo.vertices.push_back(indexed_id("m", i, width));

  std::vector<std::uint64_t> degree(m_count, 0);
  std::vector<int> targets;
  for (int k = attach; k < m_count; ++k) {
    targets.clear();
    // attach distinct earlier vertices, weight degree + 1
    while (static_cast<int>(targets.size()) < attach) {
      std::uint64_t total = 0;
      for (int v = 0; v < k; ++v) total += degree[v] + 1;
      std::uint64_t r = rng.next_below(total);
      int chosen = k - 1;
      for (int v = 0; v < k; ++v) {
        std::uint64_t w = degree[v] + 1;
        if (r < w) {
          chosen = v;
          break;
        }
        r -= w;
      }
      if (std::find(targets.begin(), targets.end(), chosen) == targets.end()) {
        targets.push_back(chosen);
      }
    }
    std::sort(targets.begin(), targets.end());
    for (int t : targets) {
      topo.edges.emplace_back(topo.vertices[t], topo.vertices[k]);
      ++degree[t];
      ++degree[k];
    }
  }
  return topo;
}

VulnCatalog sample_vulnerabilities(int m_count, int node_count, int count_min,
                                   int count_max, std::uint64_t seed) {
  if (m_count < 1 || node_count < 1 || count_min < 1 || count_max < count_min) {
    throw std::invalid_argument("bad vulnerability sampling parameters");
  }
  static constexpr double kEcmLevels[] = {0.91, 0.94, 0.97, 1.0};
  SplitMix64 rng(seed);
  auto draw_set = [&rng, count_min, count_max] {
    std::vector<Vulnerability> vulns;
    int count = count_min + static_cast<int>(rng.next_below(
                                static_cast<std::uint64_t>(count_max - count_min + 1)));
    for (int i = 0; i < count; ++i) {
      double em = rng.next_real(0.1, 3.9);
      double ecm = kEcmLevels[rng.next_below(4)];
      vulns.push_back({em, ecm});
    }
    return vulns;
  };
  VulnCatalog catalog;
  for (int i = 0; i < m_count; ++i) catalog.per_microservice.push_back(draw_set());
  for (int i = 0; i < node_count; ++i) catalog.per_node.push_back(draw_set());
  return catalog;
}

std::vector<ResourcePair> ingest_traces(const std::string& source, std::uint64_t seed,
                                        std::size_t pool_size) {
  std::vector<ResourcePair> pool;
  if (source == "synthetic") {
    SplitMix64 rng(seed);
    const double lo = std::log(0.025);
    const double hi = std::log(0.05);
    for (std::size_t i = 0; i < pool_size; ++i) {
      pool.push_back({std::exp(rng.next_real(lo, hi)), std::exp(rng.next_real(lo, hi))});
    }
    return pool;
  }

  std::ifstream in(source);
  if (!in) throw std::runtime_error("cannot open trace file: " + source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("container_id", 0) == 0) continue;  // header
    std::istringstream row(line);
    std::string id, cpu_text, ram_text;
    if (!std::getline(row, id, ',') || !std::getline(row, cpu_text, ',') ||
        !std::getline(row, ram_text, ',')) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": malformed row");
    }
    double cpu = 0.0;
    double ram = 0.0;
    try {
      cpu = std::stod(cpu_text);
      ram = std::stod(ram_text);
    } catch (const std::exception&) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": bad number");
    }
    if (cpu <= 0.0 || ram <= 0.0) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) +
                               ": requests must be strictly positive");
    }
    pool.push_back({std::min(cpu, 1.0), std::min(ram, 1.0)});
  }
  if (pool.empty()) throw std::runtime_error("trace pool is empty: " + source);
  return pool;
}

DeploymentPlan pack_nodes(std::span<const ResourcePair> pool, int m_count,
                          double pack_threshold, std::uint64_t seed) {
  if (pool.empty()) throw std::invalid_argument("resource pool is empty");
  if (pack_threshold <= 0.0 || pack_threshold > 1.0) {
    throw std::invalid_argument("pack threshold must lie in (0, 1]");
  }
  SplitMix64 rng(seed);
  const int width = id_width(m_count);

  DeploymentPlan plan;
  ResourcePair load{0.0, 0.0};
  int node_index = -1;
  auto open_node = [&] {
    ++node_index;
    plan.nodes.push_back({"n" + std::to_string(node_index), 1.0, 1.0});
    load = {0.0, 0.0};
  };
  open_node();
  for (int i = 0; i < m_count; ++i) {
    ResourcePair request = pool[rng.next_below(pool.size())];
    if (!leq_tol(request.cpu, pack_threshold) || !leq_tol(request.ram, pack_threshold)) {
      throw std::runtime_error("request exceeds the pack threshold, cannot place it");
    }
    if (!leq_tol(load.cpu + request.cpu, pack_threshold) ||
        !leq_tol(load.ram + request.ram, pack_threshold)) {
      open_node();
    }
    load.cpu += request.cpu;
    load.ram += request.ram;
    Microservice ms;
    ms.id = indexed_id("m", i, width);
    ms.cpu_request = request.cpu;
    ms.ram_request = request.ram;
    ms.node = plan.nodes.back().id;
    plan.microservices.push_back(std::move(ms));
  }
  return plan;
}

std::vector<ScenarioRow> run_scenario(const ScenarioConfig& config, int sample_index) {
  const auto sample = static_cast<std::uint64_t>(sample_index);
  Topology topo = generate_topology(config.m_count, config.attach,
                                    derive_seed(config.master_seed, sample, "topology"));
  std::vector<ResourcePair> pool = ingest_traces(
      config.trace_source, derive_seed(config.master_seed, sample, "pool"));
  DeploymentPlan plan = pack_nodes(pool, config.m_count, config.pack_threshold,
                                   derive_seed(config.master_seed, sample, "pack"));
  plan.delta = config.delta;
  VulnCatalog catalog = sample_vulnerabilities(
      config.m_count, static_cast<int>(plan.nodes.size()), config.vuln_count_min,
      config.vuln_count_max, derive_seed(config.master_seed, sample, "vulns"));
  for (std::size_t i = 0; i < plan.microservices.size(); ++i) {
    plan.microservices[i].vulnerabilities = catalog.per_microservice[i];
  }
  ValidationReport report = validate_deployment(plan);
  if (!report.ok()) {
    throw std::runtime_error("generated plan failed validation: " + report.violations.front());
  }

  std::map<std::string, std::vector<Vulnerability>> node_vulns;
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    node_vulns[plan.nodes[i].id] = catalog.per_node[i];
  }
  AttackGraph graph = build_attack_graph(topo.edges, plan, node_vulns);
  ApIndex idx = compute_attack_paths(graph);
  ObjectiveContext ctx = ObjectiveContext::from_index(idx);

  std::vector<ScenarioRow> rows;
  auto base_row = [&](const std::string& scheme) {
    ScenarioRow row;
    row.config_id = config.id;
    row.sample = sample_index;
    row.scheme = scheme;
    row.m_count = config.m_count;
    row.delta = config.delta;
    row.nodes = static_cast<int>(plan.nodes.size());
    return row;
  };
  auto push_outcome = [&](const AllocationOutcome& outcome) {
    ScenarioRow row = base_row(outcome.scheme);
    row.decoys = outcome.x.total();
    row.decoy_ratio = static_cast<double>(row.decoys) / config.m_count;
    row.metrics = count_daps(graph, outcome.x);
    row.objective = outcome.objective;
    row.exact = outcome.exact;
    row.wall_time_s = config.timing ? outcome.wall_time_s : 0.0;
    rows.push_back(std::move(row));
  };

  if (config.m_count <= config.optimal_max_m) {
    push_outcome(solve_optimal(plan, ctx));
  } else {
    ScenarioRow row = base_row("optimal");
    row.present = false;
    rows.push_back(std::move(row));
  }
  push_outcome(solve_heuristic(plan, ctx));
  push_outcome(solve_linear(plan, ctx));
  push_outcome(solve_sidecar(plan, ctx));
  push_outcome(solve_random(plan, ctx, derive_seed(config.master_seed, sample, "random-scheme")));
  return rows;
}

std::string format_csv_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return {buf, ptr};
}

std::string raw_csv_header() {
  return "config_id,sample,scheme,m_count,delta,nodes,decoys,decoy_ratio,total_aps,"
         "total_daps,dap_fraction,decoys_per_dap,objective,exact,wall_time_s";
}

std::string raw_csv_line(const ScenarioRow& row) {
  std::string line = row.config_id + "," + std::to_string(row.sample) + "," + row.scheme +
                     "," + std::to_string(row.m_count) + "," + format_csv_double(row.delta) +
                     "," + std::to_string(row.nodes) + ",";
  if (!row.present) {
    return line + ",,,,,,,absent,";
  }
  line += std::to_string(row.decoys) + "," + format_csv_double(row.decoy_ratio) + "," +
          std::to_string(row.metrics.total_aps) + "," + std::to_string(row.metrics.total_daps) +
          "," + format_csv_double(row.metrics.dap_fraction) + "," +
          format_csv_double(row.metrics.decoys_per_dap) + "," +
          format_csv_double(row.objective) + "," + (row.exact ? "true" : "false") + "," +
          format_csv_double(row.wall_time_s);
  return line;
}

namespace {

struct Aggregate {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  double mean() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  }
  // 95% half-width, normal approximation; empty for fewer than two samples.
  std::string ci() const {
    if (values.size() < 2) return "";
    double m = mean();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return format_csv_double(1.96 * sd / std::sqrt(static_cast<double>(values.size())));
  }
};

}  // namespace

void run_sweep(std::span<const ScenarioConfig> configs, const SweepOptions& options) {
  if (configs.empty()) throw std::invalid_argument("sweep needs at least one config");
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);

  struct Cell {
    const ScenarioConfig* config;
    int sample;
  };
  std::vector<Cell> cells;
  for (const auto& config : configs) {
    for (int s = 0; s < config.samples; ++s) cells.push_back({&config, s});
  }

  std::vector<std::vector<ScenarioRow>> results(cells.size());
  int thread_count = std::max(1, std::min<int>(options.threads, static_cast<int>(cells.size())));
  if (thread_count == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      results[i] = run_scenario(*cells[i].config, cells[i].sample);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    for (int t = 0; t < thread_count; ++t) {
      workers.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= cells.size() || failed.load()) return;
          try {
            results[i] = run_scenario(*cells[i].config, cells[i].sample);
          } catch (const std::exception& e) {
            std::scoped_lock lock(error_mutex);
            failed.store(true);
            if (error.empty()) error = e.what();
            return;
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failed.load()) throw std::runtime_error("sweep cell failed: " + error);
  }

  const fs::path raw_path = fs::path(options.out_dir) / "raw.csv";
  std::ofstream raw(raw_path);
  if (!raw) throw std::runtime_error("cannot write " + raw_path.string());
  raw << raw_csv_header() << "\n";
  for (const auto& rows : results) {
    for (const auto& row : rows) raw << raw_csv_line(row) << "\n";
  }
  raw.close();

  // Aggregate present rows per (config, scheme), keeping first-seen order.
  struct Group {
    std::string config_id;
    std::string scheme;
    int m_count = 0;
    double delta = 0.0;
    Aggregate decoys, decoy_ratio, dap_fraction, decoys_per_dap, objective, wall_time;
  };
  std::vector<Group> groups;
  auto group_for = [&](const ScenarioRow& row) -> Group& {
    for (auto& g : groups) {
      if (g.config_id == row.config_id && g.scheme == row.scheme) return g;
    }
    groups.push_back({row.config_id, row.scheme, row.m_count, row.delta, {}, {}, {}, {}, {}, {}});
    return groups.back();
  };
  for (const auto& rows : results) {
    for (const auto& row : rows) {
      if (!row.present) continue;
      Group& g = group_for(row);
      g.decoys.add(row.decoys);
      g.decoy_ratio.add(row.decoy_ratio);
      g.dap_fraction.add(row.metrics.dap_fraction);
      g.decoys_per_dap.add(row.metrics.decoys_per_dap);
      g.objective.add(row.objective);
      g.wall_time.add(row.wall_time_s);
    }
  }

  const fs::path summary_path = fs::path(options.out_dir) / "summary.csv";
  std::ofstream summary(summary_path);
  if (!summary) throw std::runtime_error("cannot write " + summary_path.string());
  summary << "config_id,scheme,m_count,delta,samples,decoys_mean,decoys_ci95,"
             "decoy_ratio_mean,decoy_ratio_ci95,dap_fraction_mean,dap_fraction_ci95,"
             "decoys_per_dap_mean,decoys_per_dap_ci95,objective_mean,objective_ci95,"
             "wall_time_mean,wall_time_ci95\n";
  for (const auto& g : groups) {
    summary << g.config_id << "," << g.scheme << "," << g.m_count << ","
            << format_csv_double(g.delta) << "," << g.decoys.values.size() << ","
            << format_csv_double(g.decoys.mean()) << "," << g.decoys.ci() << ","
            << format_csv_double(g.decoy_ratio.mean()) << "," << g.decoy_ratio.ci() << ","
            << format_csv_double(g.dap_fraction.mean()) << "," << g.dap_fraction.ci() << ","
            << format_csv_double(g.decoys_per_dap.mean()) << "," << g.decoys_per_dap.ci()
            << "," << format_csv_double(g.objective.mean()) << "," << g.objective.ci() << ","
            << format_csv_double(g.wall_time.mean()) << "," << g.wall_time.ci() << "\n";
  }
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
  SweepSpec spec;
  ScenarioConfig base;
  base.master_seed = j.value("seed", std::uint64_t{0});
  base.samples = j.value("samples", 1);
  base.attach = j.value("attach", 2);
  base.pack_threshold = j.value("pack_threshold", 0.7);
  base.vuln_count_min = j.value("vuln_count_min", 3);
  base.vuln_count_max = j.value("vuln_count_max", 5);
  base.trace_source = j.value("trace", std::string("synthetic"));
  base.optimal_max_m = j.value("optimal_max_m", 30);
  base.timing = j.value("timing", true);
  spec.threads = j.value("threads", 1);

  int index = 0;
  for (const auto& c : j.at("configs")) {
    ScenarioConfig config = base;
    config.m_count = c.at("m").get<int>();
    config.delta = c.at("delta").get<double>();
    config.id = c.value("id", "cfg" + std::to_string(index));
    if (c.contains("samples")) config.samples = c.at("samples").get<int>();
    if (c.contains("attach")) config.attach = c.at("attach").get<int>();
    spec.configs.push_back(std::move(config));
    ++index;
  }
  if (spec.configs.empty()) throw std::invalid_argument("sweep config has no entries");
  return spec;
}

}  // namespace decoynet
