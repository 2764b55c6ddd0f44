#include "decoynet/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "decoynet/allocators.hpp"

namespace decoynet::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Memoized exhaustive enumeration of minimum-weight paths into one target.
// Distances are accumulated backward and compared exactly, the same way they
// are combined, so tie detection is self-consistent.
class TargetEnumerator {
 public:
  TargetEnumerator(const AttackGraph& g, std::uint32_t target, std::size_t* budget)
      : g_(g),
        target_(target),
        budget_(budget),
        dist_(g.vertex_count(), kInf),
        dist_done_(g.vertex_count(), 0),
        paths_(g.vertex_count()) {}

  double dist(std::uint32_t u) {
    if (dist_done_[u]) return dist_[u];
    dist_done_[u] = 1;
    if (u == target_) {
      dist_[u] = 0.0;
      return 0.0;
    }
    double best = kInf;
    for (const auto& e : g_.out_edges(u)) {
      double dv = dist(e.to);
      if (dv < kInf) best = std::min(best, e.weight + dv);
    }
    dist_[u] = best;
    return best;
  }

  const std::vector<std::vector<std::uint32_t>>& paths(std::uint32_t u) {
    if (paths_[u]) return *paths_[u];
    std::vector<std::vector<std::uint32_t>> out;
    if (u == target_) {
      out.push_back({u});
    } else if (dist(u) < kInf) {
      for (const auto& e : g_.out_edges(u)) {
        if (dist(e.to) == kInf || e.weight + dist(e.to) != dist(u)) continue;
        for (const auto& tail : paths(e.to)) {
          std::vector<std::uint32_t> path;
          path.reserve(tail.size() + 1);
          path.push_back(u);
          path.insert(path.end(), tail.begin(), tail.end());
          if (path.size() > *budget_) {
            throw std::length_error("minimum-weight path enumeration exceeded its budget");
          }
          *budget_ -= path.size();
          out.push_back(std::move(path));
        }
      }
    }
    paths_[u] = std::move(out);
    return *paths_[u];
  }

 private:
  const AttackGraph& g_;
  std::uint32_t target_;
  std::size_t* budget_;
  std::vector<double> dist_;
  std::vector<char> dist_done_;
  std::vector<std::optional<std::vector<std::vector<std::uint32_t>>>> paths_;
};

// Same preference order the exact solver documents: objective, then fewer
// decoys, then lexicographically smaller counts.
bool better_candidate(double obj_a, std::span<const int> xa, double obj_b,
                      std::span<const int> xb) {
  if (obj_a != obj_b) return obj_a > obj_b;
  long ta = 0;
  long tb = 0;
  for (int v : xa) ta += v;
  for (int v : xb) tb += v;
  if (ta != tb) return ta < tb;
  return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
}

struct FeasibleWalk {
  const DeploymentPlan* plan = nullptr;
  std::vector<std::uint32_t> node_of;   // microservice position -> node index
  std::vector<ResourcePair> request;
  std::vector<ResourcePair> remaining;  // node budgets
  int cap = -1;

  void init(const DeploymentPlan& p) {
    plan = &p;
    std::unordered_map<std::string, std::uint32_t> node_index;
    for (std::uint32_t i = 0; i < p.nodes.size(); ++i) node_index.emplace(p.nodes[i].id, i);
    remaining.resize(p.nodes.size());
    for (std::uint32_t i = 0; i < p.nodes.size(); ++i) {
      ResourcePair slack = available_resources(p, p.nodes[i].id);
      remaining[i] = {p.delta * slack.cpu, p.delta * slack.ram};
    }
    node_of.resize(p.microservices.size());
    request.resize(p.microservices.size());
    for (std::uint32_t i = 0; i < p.microservices.size(); ++i) {
      node_of[i] = node_index.at(p.microservices[i].node);
      request[i] = p.microservices[i].request();
    }
  }

  // Calls fn(x) for every feasible allocation, x indexed by microservice
  // position in the plan. Returns false if fn ever returns false (early stop).
  template <typename Fn>
  bool walk(std::vector<int>& x, std::size_t depth, Fn&& fn) {
    if (depth == x.size()) return fn(std::span<const int>(x));
    auto& budget = remaining[node_of[depth]];
    int fit = max_decoys_for(budget, request[depth]);
    if (cap >= 0) fit = std::min(fit, cap);
    for (int v = 0; v <= fit; ++v) {
      x[depth] = v;
      budget.cpu -= v * request[depth].cpu;
      budget.ram -= v * request[depth].ram;
      bool keep_going = walk(x, depth + 1, fn);
      budget.cpu += v * request[depth].cpu;
      budget.ram += v * request[depth].ram;
      x[depth] = 0;
      if (!keep_going) return false;
    }
    return true;
  }
};

}  // namespace

std::vector<std::vector<std::uint32_t>> minimum_weight_paths(const AttackGraph& g,
                                                             std::uint32_t src,
                                                             std::uint32_t dst,
                                                             std::size_t max_path_nodes) {
  std::size_t budget = max_path_nodes;
  TargetEnumerator en(g, dst, &budget);
  if (src == dst) return {};
  return en.paths(src);
}

double expected_interceptions(const AttackGraph& g, const DecoyAllocation& x,
                              std::size_t max_original_vertices) {
  if (g.original_count() > max_original_vertices) {
    throw std::invalid_argument("instance too large for exhaustive interception oracle");
  }
  AttackGraph aug = build_augmented_graph(g, x);
  const auto an = static_cast<std::uint32_t>(aug.vertex_count());

  double total = 0.0;
  std::size_t budget = std::size_t{1} << 22;
  for (std::uint32_t t = 0; t < an; ++t) {
    TargetEnumerator en(aug, t, &budget);
    for (std::uint32_t s = 0; s < an; ++s) {
      if (s == t || en.dist(s) == kInf) continue;
      const auto& paths = en.paths(s);
      if (paths.empty()) continue;
      long long decoys = 0;
      for (const auto& path : paths) {
        for (std::size_t k = 1; k + 1 < path.size(); ++k) {
          if (aug.is_decoy(path[k])) ++decoys;
        }
      }
      total += static_cast<double>(decoys) / static_cast<double>(paths.size());
    }
  }
  return total;
}

BruteForceResult brute_force_best_allocation(const DeploymentPlan& plan,
                                             const ObjectiveContext& ctx,
                                             int per_microservice_cap,
                                             std::uint64_t max_candidates) {
  FeasibleWalk fw;
  fw.init(plan);
  fw.cap = per_microservice_cap;

  // Map plan order to ctx vertex indices once.
  std::vector<std::uint32_t> ctx_index(plan.microservices.size());
  for (std::uint32_t i = 0; i < plan.microservices.size(); ++i) {
    ctx_index[i] = ctx.require_index(plan.microservices[i].id);
  }

  BruteForceResult result;
  std::vector<int> best(ctx.vertex_count(), 0);
  double best_obj = 0.0;
  bool have_best = false;

  std::vector<int> x(plan.microservices.size(), 0);
  std::vector<int> dense(ctx.vertex_count(), 0);
  fw.walk(x, 0, [&](std::span<const int> candidate) {
    if (++result.candidates > max_candidates) {
      throw std::length_error("brute-force allocation enumeration exceeded its budget");
    }
    std::fill(dense.begin(), dense.end(), 0);
    for (std::uint32_t i = 0; i < candidate.size(); ++i) dense[ctx_index[i]] = candidate[i];
    double obj = objective_value(ctx, dense);
    if (!have_best || better_candidate(obj, dense, best_obj, best)) {
      have_best = true;
      best_obj = obj;
      best = dense;
    }
    return true;
  });

  for (std::uint32_t v = 0; v < best.size(); ++v) {
    if (best[v] > 0) result.x.counts.emplace(ctx.vertex_ids()[v], best[v]);
  }
  result.objective = best_obj;
  return result;
}

std::uint64_t count_feasible_allocations(const DeploymentPlan& plan, int per_microservice_cap,
                                         std::uint64_t stop_after) {
  FeasibleWalk fw;
  fw.init(plan);
  fw.cap = per_microservice_cap;
  std::uint64_t count = 0;
  std::vector<int> x(plan.microservices.size(), 0);
  fw.walk(x, 0, [&](std::span<const int>) { return ++count <= stop_after; });
  return count;
}

SmallInstance random_small_instance(SplitMix64& rng, int vertex_count,
                                    double edge_probability, int node_count,
                                    double delta_lo, double delta_hi) {
  SmallInstance inst;
  std::vector<std::string> ids;
  for (int i = 0; i < vertex_count; ++i) {
    std::string id = "v" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    ids.push_back(id);
  }

  std::vector<int> assignment(vertex_count);
  std::vector<ResourcePair> requests(vertex_count);
  std::vector<ResourcePair> node_load(node_count);
  for (int i = 0; i < vertex_count; ++i) {
    assignment[i] = static_cast<int>(rng.next_below(node_count));
    requests[i] = {rng.next_real(0.08, 0.3), rng.next_real(0.08, 0.3)};
    node_load[assignment[i]].cpu += requests[i].cpu;
    node_load[assignment[i]].ram += requests[i].ram;
  }
  for (int nidx = 0; nidx < node_count; ++nidx) {
    ComputeNode node;
    node.id = "n" + std::to_string(nidx);
    node.cpu_capacity = node_load[nidx].cpu + rng.next_real(0.5, 1.5);
    node.ram_capacity = node_load[nidx].ram + rng.next_real(0.5, 1.5);
    inst.plan.nodes.push_back(node);
  }
  for (int i = 0; i < vertex_count; ++i) {
    Microservice ms;
    ms.id = ids[i];
    ms.cpu_request = requests[i].cpu;
    ms.ram_request = requests[i].ram;
    ms.node = "n" + std::to_string(assignment[i]);
    ms.vulnerabilities.push_back({rng.next_real(0.5, 3.9), 1.0});
    inst.plan.microservices.push_back(std::move(ms));
  }
  inst.plan.delta = rng.next_real(delta_lo, delta_hi);

  for (const auto& id : ids) inst.graph.add_vertex(id);
  for (int i = 0; i < vertex_count; ++i) {
    for (int j = i + 1; j < vertex_count; ++j) {
      if (rng.next_unit() < edge_probability) {
        inst.graph.add_edge(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                            rng.next_real(0.5, 3.9));
      }
    }
  }
  return inst;
}

SuiteReport run_objective_oracle_suite(int trials, int max_vertices, std::uint64_t seed,
                                       int x_cap, double rel_tol,
                                       std::uint64_t max_feasible_per_instance) {
  const auto start = Clock::now();
  SuiteReport report;
  SplitMix64 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    int n = 4 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_vertices - 4 + 1)));
    SmallInstance inst = random_small_instance(rng, n, 0.45, 2, 0.4, 0.9);
    while (count_feasible_allocations(inst.plan, x_cap, max_feasible_per_instance) >
               max_feasible_per_instance &&
           inst.plan.delta > 1e-6) {
      inst.plan.delta *= 0.8;
    }

    ApIndex idx = compute_attack_paths(inst.graph);
    ObjectiveContext ctx = ObjectiveContext::from_index(idx);

    FeasibleWalk fw;
    fw.init(inst.plan);
    fw.cap = x_cap;
    std::vector<int> x(inst.plan.microservices.size(), 0);
    // plan and graph share vertex order here by construction
    fw.walk(x, 0, [&](std::span<const int> candidate) {
      DecoyAllocation alloc;
      for (std::uint32_t i = 0; i < candidate.size(); ++i) {
        if (candidate[i] > 0) alloc.counts.emplace(inst.plan.microservices[i].id, candidate[i]);
      }
      double closed_form = objective_value(ctx, ctx.dense_counts(alloc));
      double enumerated = expected_interceptions(inst.graph, alloc);
      double rel_err = std::fabs(closed_form - enumerated) /
                       std::max(1.0, std::fabs(enumerated));
      report.max_rel_err = std::max(report.max_rel_err, rel_err);
      ++report.checks;
      if (rel_err > rel_tol) {
        ++report.failures;
        if (report.notes.size() < 5) {
          report.notes.push_back("trial " + std::to_string(trial) + ": objective " +
                                 std::to_string(closed_form) + " vs oracle " +
                                 std::to_string(enumerated));
        }
      }
      return true;
    });
    ++report.trials;
  }
  report.seconds = seconds_since(start);
  return report;
}

SuiteReport run_exhaustive_optimality_suite(int trials, std::uint64_t seed, int max_vertices,
                                            int max_total_decoys) {
  const auto start = Clock::now();
  SuiteReport report;
  SplitMix64 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    int n = 4 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_vertices - 4 + 1)));
    SmallInstance inst = random_small_instance(rng, n, 0.5, 2, 0.3, 0.8);
    auto total_fit = [&] {
      int total = 0;
      for (const auto& m : inst.plan.microservices) {
        total += max_deployable_decoys(inst.plan, m.id);
      }
      return total;
    };
    while (total_fit() > max_total_decoys && inst.plan.delta > 1e-6) {
      inst.plan.delta *= 0.85;
    }

    ApIndex idx = compute_attack_paths(inst.graph);
    ObjectiveContext ctx = ObjectiveContext::from_index(idx);
    BruteForceResult reference = brute_force_best_allocation(inst.plan, ctx);
    AllocationOutcome solved = solve_optimal(inst.plan, ctx);
    report.checks += reference.candidates;
    ++report.trials;
    if (!solved.exact || solved.objective != reference.objective) {
      ++report.failures;
      if (report.notes.size() < 5) {
        report.notes.push_back("trial " + std::to_string(trial) + ": solver " +
                               std::to_string(solved.objective) +
                               (solved.exact ? "" : " (truncated)") + " vs brute force " +
                               std::to_string(reference.objective));
      }
    }
  }
  report.seconds = seconds_since(start);
  return report;
}

SuiteReport run_knapsack_exactness_suite(int trials, std::uint64_t seed,
                                         int max_values_per_item) {
  const auto start = Clock::now();
  SuiteReport report;
  SplitMix64 rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    int item_count = 3 + static_cast<int>(rng.next_below(4));
    std::vector<KnapsackItem> items;
    for (int i = 0; i < item_count; ++i) {
      KnapsackItem item;
      item.value = static_cast<long long>(rng.next_below(50));
      item.request = {rng.next_real(0.05, 0.4), rng.next_real(0.05, 0.4)};
      items.push_back(item);
    }
    ResourcePair budget{rng.next_real(0.3, 1.2), rng.next_real(0.3, 1.2)};
    for (const auto& item : items) {
      while (max_decoys_for(budget, item.request) >= max_values_per_item) {
        budget.cpu *= 0.8;
        budget.ram *= 0.8;
      }
    }

    std::vector<int> solved = solve_two_resource_knapsack(items, budget);
    long long solved_value = 0;
    ResourcePair used{0.0, 0.0};
    for (std::size_t i = 0; i < items.size(); ++i) {
      solved_value += items[i].value * solved[i];
      used.cpu += solved[i] * items[i].request.cpu;
      used.ram += solved[i] * items[i].request.ram;
    }
    bool feasible = leq_tol(used.cpu, budget.cpu) && leq_tol(used.ram, budget.ram);

    long long best_value = 0;
    std::vector<int> x(items.size(), 0);
    std::uint64_t combos = 0;
    auto enumerate = [&](auto&& self, std::size_t k, ResourcePair rem, long long val) -> void {
      if (k == items.size()) {
        ++combos;
        best_value = std::max(best_value, val);
        return;
      }
      int cap = max_decoys_for(rem, items[k].request);
      for (int v = 0; v <= cap; ++v) {
        self(self, k + 1,
             ResourcePair{rem.cpu - v * items[k].request.cpu,
                          rem.ram - v * items[k].request.ram},
             val + v * items[k].value);
      }
    };
    enumerate(enumerate, 0, budget, 0);

    report.checks += combos;
    ++report.trials;
    if (!feasible || solved_value != best_value) {
      ++report.failures;
      if (report.notes.size() < 5) {
        report.notes.push_back("trial " + std::to_string(trial) + ": knapsack " +
                               std::to_string(solved_value) + (feasible ? "" : " (infeasible)") +
                               " vs enumeration " + std::to_string(best_value));
      }
    }
  }
  report.seconds = seconds_since(start);
  return report;
}

}  // namespace decoynet::oracle
