#include "decoynet/allocators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "decoynet/rng.hpp"

namespace decoynet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline double occupancy_ratio(int count) {
  return static_cast<double>(count) / (1.0 + static_cast<double>(count));
}

// Plan data reshaped to ctx vertex indices.
struct PlanView {
  std::vector<std::uint32_t> node_of;      // vertex -> node index
  std::vector<ResourcePair> request;       // vertex -> resource request
  std::vector<ResourcePair> budget;        // node index -> delta * slack
  std::vector<const Microservice*> ms;     // vertex -> plan entry
};

PlanView make_view(const DeploymentPlan& plan, const ObjectiveContext& ctx) {
  PlanView view;
  std::unordered_map<std::string, std::uint32_t> node_index;
  for (std::uint32_t i = 0; i < plan.nodes.size(); ++i) {
    node_index.emplace(plan.nodes[i].id, i);
  }
  view.budget.resize(plan.nodes.size());
  for (std::uint32_t i = 0; i < plan.nodes.size(); ++i) {
    ResourcePair slack = available_resources(plan, plan.nodes[i].id);
    view.budget[i] = {plan.delta * slack.cpu, plan.delta * slack.ram};
  }
  std::unordered_map<std::string, const Microservice*> by_id;
  for (const auto& m : plan.microservices) by_id.emplace(m.id, &m);
  const auto n = ctx.vertex_count();
  view.node_of.resize(n);
  view.request.resize(n);
  view.ms.resize(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    auto it = by_id.find(ctx.vertex_ids()[v]);
    if (it == by_id.end()) {
      throw std::invalid_argument("graph vertex not in plan: " + ctx.vertex_ids()[v]);
    }
    view.ms[v] = it->second;
    view.request[v] = it->second->request();
    view.node_of[v] = node_index.at(it->second->node);
  }
  return view;
}

void spend(ResourcePair& budget, const ResourcePair& request, int count = 1) {
  budget.cpu -= count * request.cpu;
  budget.ram -= count * request.ram;
}

DecoyAllocation to_allocation(const ObjectiveContext& ctx, std::span<const int> x) {
  DecoyAllocation alloc;
  for (std::uint32_t v = 0; v < x.size(); ++v) {
    if (x[v] > 0) alloc.counts.emplace(ctx.vertex_ids()[v], x[v]);
  }
  return alloc;
}

// Incumbent preference: larger objective, then fewer decoys, then
// lexicographically smaller counts in vertex-index order.
bool better_allocation(double obj_a, std::span<const int> xa, double obj_b,
                       std::span<const int> xb) {
  if (obj_a != obj_b) return obj_a > obj_b;
  long total_a = 0;
  long total_b = 0;
  for (int v : xa) total_a += v;
  for (int v : xb) total_b += v;
  if (total_a != total_b) return total_a < total_b;
  return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
}

}  // namespace

bool is_maximal_allocation(const DeploymentPlan& plan, const DecoyAllocation& x) {
  std::unordered_map<std::string, ResourcePair> remaining;
  for (const auto& n : plan.nodes) {
    ResourcePair slack = available_resources(plan, n.id);
    remaining[n.id] = {plan.delta * slack.cpu, plan.delta * slack.ram};
  }
  for (const auto& [id, count] : x.counts) {
    const Microservice* m = plan.find_microservice(id);
    if (m == nullptr) throw std::invalid_argument("allocation references unknown id: " + id);
    spend(remaining[m->node], m->request(), count);
  }
  for (const auto& m : plan.microservices) {
    if (max_decoys_for(remaining[m.node], m.request()) >= 1) return false;
  }
  return true;
}

AllocationOutcome solve_heuristic(const DeploymentPlan& plan, const ObjectiveContext& ctx,
                                  std::vector<HeuristicIteration>* trace,
                                  HeuristicState* final_state) {
  const auto start = Clock::now();
  PlanView view = make_view(plan, ctx);
  const auto n = static_cast<std::uint32_t>(ctx.vertex_count());
  const auto pair_count = static_cast<std::uint32_t>(ctx.pair_count());

  std::vector<int> x(n, 0);
  std::vector<ResourcePair> budget = view.budget;
  std::vector<int> deployable(n, 0);
  auto refresh_deployable = [&] {
    for (std::uint32_t v = 0; v < n; ++v) {
      deployable[v] = max_decoys_for(budget[view.node_of[v]], view.request[v]);
    }
  };
  refresh_deployable();

  // Exact marginal gains for every vertex: a vertex gains its occupancy bump
  // times the endpoint factors of pairs it sits inside (sum_factor), plus the
  // interior occupancy sums of pairs it terminates, scaled by the far
  // endpoint's copies (gain_ep). Both aggregates are maintained incrementally
  // per placement, touching only the pairs the chosen vertex belongs to.
  std::vector<double> pair_factor(pair_count);
  std::vector<double> pair_interior(pair_count);
  std::vector<double> sum_factor(n, 0.0);
  std::vector<double> gain_ep(n, 0.0);
  std::vector<double> gains(n, 0.0);
  for (std::uint32_t p = 0; p < pair_count; ++p) {
    pair_factor[p] = 1.0;
    pair_interior[p] = 0.0;
    for (std::uint32_t v : ctx.pair_interior(p)) sum_factor[v] += 1.0;
  }
  auto recompute_gains = [&] {
    for (std::uint32_t v = 0; v < n; ++v) {
      double bump = occupancy_ratio(x[v] + 1) - occupancy_ratio(x[v]);
      gains[v] = bump * sum_factor[v] + gain_ep[v];
    }
  };
  auto apply_placement = [&](std::uint32_t chosen) {
    // x[chosen] has already been incremented
    double shift = occupancy_ratio(x[chosen]) - occupancy_ratio(x[chosen] - 1);
    for (std::uint32_t p : ctx.pairs_with_interior(chosen)) {
      std::uint32_t src = ctx.pair_src(p);
      std::uint32_t dst = ctx.pair_dst(p);
      pair_interior[p] += shift;
      gain_ep[src] += (1.0 + x[dst]) * shift;
      gain_ep[dst] += (1.0 + x[src]) * shift;
    }
    for (std::uint32_t p : ctx.pairs_with_endpoint(chosen)) {
      std::uint32_t src = ctx.pair_src(p);
      std::uint32_t dst = ctx.pair_dst(p);
      std::uint32_t other = src == chosen ? dst : src;
      double factor = (1.0 + x[src]) * (1.0 + x[dst]);
      double delta_factor = factor - pair_factor[p];
      pair_factor[p] = factor;
      for (std::uint32_t v : ctx.pair_interior(p)) sum_factor[v] += delta_factor;
      gain_ep[other] += pair_interior[p];  // the far factor grew by exactly one
    }
    recompute_gains();
  };
  recompute_gains();

  std::vector<double> running_score(n);
  for (std::uint32_t v = 0; v < n; ++v) running_score[v] = ctx.betweenness_of(v);
  std::vector<std::vector<long long>> tally(n, std::vector<long long>(n, 0));

  bool first_round = true;
  while (true) {
    // Rebuild the queue: candidates that still fit, ranked by priority.
    bool found = false;
    std::uint32_t chosen = 0;
    double chosen_priority = 0.0;
    double chosen_gain = 0.0;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (deployable[v] < 1) continue;
      double priority = first_round ? ctx.betweenness_of(v) * deployable[v]
                                    : gains[v] * deployable[v];
      if (!found || priority > chosen_priority ||
          (priority == chosen_priority &&
           ctx.vertex_ids()[v] < ctx.vertex_ids()[chosen])) {
        found = true;
        chosen = v;
        chosen_priority = priority;
        chosen_gain = gains[v];
      }
    }
    if (!found) break;
    first_round = false;

    if (trace != nullptr) {
      trace->push_back({chosen, chosen_priority, chosen_gain, deployable[chosen]});
    }

    x[chosen] += 1;
    spend(budget[view.node_of[chosen]], view.request[chosen]);

    // Bookkeeping in the shape of the per-iteration score updates: pairs with
    // the chosen microservice at an endpoint bump their interior vertices'
    // running score by (x_other + 1) and the interaction tally by (x_chosen + 1).
    for (std::uint32_t p : ctx.pairs_with_endpoint(chosen)) {
      std::uint32_t other = ctx.pair_src(p) == chosen ? ctx.pair_dst(p) : ctx.pair_src(p);
      for (std::uint32_t i : ctx.pair_interior(p)) {
        running_score[i] += static_cast<double>(x[other] + 1);
        tally[i][other] += x[chosen] + 1;
      }
    }

    refresh_deployable();
    apply_placement(chosen);
  }

  AllocationOutcome outcome;
  outcome.x = to_allocation(ctx, x);
  outcome.objective = objective_value(ctx, x);
  outcome.scheme = "heuristic";
  outcome.exact = false;
  outcome.wall_time_s = seconds_since(start);
  if (final_state != nullptr) {
    final_state->x = x;
    final_state->node_budget = budget;
    final_state->deployable = deployable;
    final_state->running_score = running_score;
    final_state->interaction_tally = tally;
  }
  return outcome;
}

namespace {

struct BranchState {
  const ObjectiveContext* ctx = nullptr;
  const PlanView* view = nullptr;
  std::vector<std::uint32_t> vars;
  std::vector<int> x;
  std::vector<ResourcePair> budget;
  std::vector<int> best_x;
  double best_obj = 0.0;
  std::uint64_t nodes = 0;
  std::uint64_t max_nodes = 0;
  Clock::time_point start;
  double max_seconds = 0.0;
  bool truncated = false;

  void offer(double obj, std::span<const int> candidate) {
    if (better_allocation(obj, candidate, best_obj, best_x)) {
      best_obj = obj;
      best_x.assign(candidate.begin(), candidate.end());
    }
  }

  // Objective at the componentwise cap every undecided variable could still
  // reach on its node's leftover budget. Monotone in every component, so this
  // never under-estimates a completion, including in floating point.
  double bound(std::size_t depth) {
    std::vector<int> capped = x;
    bool any_headroom = false;
    for (std::size_t k = depth; k < vars.size(); ++k) {
      std::uint32_t v = vars[k];
      int cap = max_decoys_for(budget[view->node_of[v]], view->request[v]);
      if (cap > 0) any_headroom = true;
      capped[v] = cap;
    }
    if (!any_headroom) return -1.0;  // signals "current x is the only completion"
    return objective_value(*ctx, capped);
  }

  void search(std::size_t depth) {
    if (truncated) return;
    if (++nodes > max_nodes || seconds_since(start) > max_seconds) {
      truncated = true;
      return;
    }
    if (depth == vars.size()) {
      offer(objective_value(*ctx, x), x);
      return;
    }
    std::uint32_t v = vars[depth];
    ResourcePair& node_budget = budget[view->node_of[v]];
    int cap = max_decoys_for(node_budget, view->request[v]);
    for (int value = cap; value >= 0; --value) {
      x[v] = value;
      spend(node_budget, view->request[v], value);
      double ub = bound(depth + 1);
      if (ub < 0.0) {
        offer(objective_value(*ctx, x), x);  // nothing fits below this point
      } else if (ub > best_obj) {
        search(depth + 1);
      }
      spend(node_budget, view->request[v], -value);
      x[v] = 0;
      if (truncated) return;
    }
  }
};

}  // namespace

AllocationOutcome solve_optimal(const DeploymentPlan& plan, const ObjectiveContext& ctx,
                                const SearchLimits& limits) {
  const auto start = Clock::now();
  PlanView view = make_view(plan, ctx);
  const auto n = static_cast<std::uint32_t>(ctx.vertex_count());

  BranchState state;
  state.ctx = &ctx;
  state.view = &view;
  state.x.assign(n, 0);
  state.budget = view.budget;
  state.best_x.assign(n, 0);
  state.best_obj = objective_value(ctx, state.x);
  state.max_nodes = limits.max_nodes;
  state.max_seconds = limits.max_seconds;
  state.start = start;

  // Warm start from the heuristic; with an equal-value incumbent already in
  // place, whole subtrees close on the first bound check.
  AllocationOutcome warm = solve_heuristic(plan, ctx);
  std::vector<int> warm_x = ctx.dense_counts(warm.x);
  state.offer(objective_value(ctx, warm_x), warm_x);

  std::vector<int> zero_x(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    bool relevant = !ctx.pairs_with_interior(v).empty() || !ctx.pairs_with_endpoint(v).empty();
    if (!relevant) continue;
    if (max_decoys_for(view.budget[view.node_of[v]], view.request[v]) < 1) continue;
    state.vars.push_back(v);
  }
  std::vector<double> gain0(n, 0.0);
  for (std::uint32_t v : state.vars) gain0[v] = marginal_gain(ctx, zero_x, v);
  std::sort(state.vars.begin(), state.vars.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (gain0[a] != gain0[b]) return gain0[a] > gain0[b];
    return ctx.vertex_ids()[a] < ctx.vertex_ids()[b];
  });

  state.search(0);

  AllocationOutcome outcome;
  outcome.x = to_allocation(ctx, state.best_x);
  outcome.objective = state.best_obj;
  outcome.scheme = "optimal";
  outcome.exact = !state.truncated;
  outcome.wall_time_s = seconds_since(start);
  return outcome;
}

namespace {

struct KnapsackSearch {
  std::span<const KnapsackItem> items;
  std::vector<std::size_t> order;          // by value density, best first
  std::vector<double> suffix_cpu_density;  // max value/cpu over order[k..]
  std::vector<double> suffix_ram_density;
  std::vector<int> x;
  std::vector<int> best_x;
  long long value = 0;
  long long best_value = 0;

  void offer() {
    auto better = [&] {
      if (value != best_value) return value > best_value;
      long ta = 0;
      long tb = 0;
      for (int v : x) ta += v;
      for (int v : best_x) tb += v;
      if (ta != tb) return ta < tb;
      return std::lexicographical_compare(x.begin(), x.end(), best_x.begin(), best_x.end());
    };
    if (better()) {
      best_value = value;
      best_x = x;
    }
  }

  void search(std::size_t k, ResourcePair remaining) {
    if (k == order.size()) {
      offer();
      return;
    }
    const auto& item = items[order[k]];
    int cap = max_decoys_for(remaining, item.request);
    for (int v = cap; v >= 0; --v) {
      ResourcePair rem{remaining.cpu - v * item.request.cpu,
                       remaining.ram - v * item.request.ram};
      long long val = value + static_cast<long long>(v) * item.value;
      double ub = static_cast<double>(val) +
                  std::min(std::max(rem.cpu, 0.0) * suffix_cpu_density[k + 1],
                           std::max(rem.ram, 0.0) * suffix_ram_density[k + 1]);
      // Values are integral: an improvement means >= best_value + 1, which
      // cannot hide below best_value + 0.5 even with bound rounding.
      if (ub <= static_cast<double>(best_value) + 0.5) continue;
      x[order[k]] = v;
      value = val;
      search(k + 1, rem);
      value -= static_cast<long long>(v) * item.value;
      x[order[k]] = 0;
    }
  }
};

}  // namespace

std::vector<int> solve_two_resource_knapsack(std::span<const KnapsackItem> items,
                                             ResourcePair budget) {
  KnapsackSearch search;
  search.items = items;
  search.order.resize(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) search.order[i] = i;
  auto density = [&](std::size_t i) {
    return static_cast<double>(items[i].value) /
           std::max(items[i].request.cpu + items[i].request.ram, 1e-12);
  };
  std::sort(search.order.begin(), search.order.end(), [&](std::size_t a, std::size_t b) {
    double da = density(a);
    double db = density(b);
    if (da != db) return da > db;
    return a < b;
  });
  const auto n = items.size();
  search.suffix_cpu_density.assign(n + 1, 0.0);
  search.suffix_ram_density.assign(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    const auto& item = items[search.order[k]];
    double dc = item.value <= 0 ? 0.0 : static_cast<double>(item.value) / item.request.cpu;
    double dr = item.value <= 0 ? 0.0 : static_cast<double>(item.value) / item.request.ram;
    search.suffix_cpu_density[k] = std::max(search.suffix_cpu_density[k + 1], dc);
    search.suffix_ram_density[k] = std::max(search.suffix_ram_density[k + 1], dr);
  }
  search.x.assign(n, 0);
  search.best_x.assign(n, 0);
  search.search(0, budget);
  return search.best_x;
}

AllocationOutcome solve_linear(const DeploymentPlan& plan, const ObjectiveContext& ctx) {
  const auto start = Clock::now();
  PlanView view = make_view(plan, ctx);
  const auto n = static_cast<std::uint32_t>(ctx.vertex_count());

  std::vector<long long> through_count(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    through_count[v] = static_cast<long long>(ctx.pairs_with_interior(v).size());
  }

  std::vector<int> x(n, 0);
  std::vector<ResourcePair> remaining = view.budget;
  for (std::uint32_t node = 0; node < view.budget.size(); ++node) {
    std::vector<std::uint32_t> members;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (view.node_of[v] == node) members.push_back(v);
    }
    if (members.empty()) continue;
    std::vector<KnapsackItem> items;
    items.reserve(members.size());
    for (std::uint32_t v : members) items.push_back({through_count[v], view.request[v]});
    std::vector<int> counts = solve_two_resource_knapsack(items, view.budget[node]);
    for (std::size_t i = 0; i < members.size(); ++i) {
      x[members[i]] = counts[i];
      spend(remaining[node], view.request[members[i]], counts[i]);
    }
  }

  // Deterministic top-up: at a knapsack optimum only zero-coefficient
  // microservices can still fit, so this never changes the knapsack value but
  // makes the allocation maximal by inclusion like the other schemes.
  while (true) {
    bool placed = false;
    std::uint32_t pick = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (max_decoys_for(remaining[view.node_of[v]], view.request[v]) < 1) continue;
      if (!placed || through_count[v] > through_count[pick] ||
          (through_count[v] == through_count[pick] &&
           ctx.vertex_ids()[v] < ctx.vertex_ids()[pick])) {
        placed = true;
        pick = v;
      }
    }
    if (!placed) break;
    x[pick] += 1;
    spend(remaining[view.node_of[pick]], view.request[pick]);
  }

  AllocationOutcome outcome;
  outcome.x = to_allocation(ctx, x);
  outcome.objective = objective_value(ctx, x);
  outcome.scheme = "linear";
  outcome.exact = false;
  outcome.wall_time_s = seconds_since(start);
  return outcome;
}

AllocationOutcome solve_sidecar(const DeploymentPlan& plan, const ObjectiveContext& ctx) {
  const auto start = Clock::now();
  PlanView view = make_view(plan, ctx);
  const auto n = static_cast<std::uint32_t>(ctx.vertex_count());

  std::vector<double> vuln_weight(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    vuln_weight[v] = edge_weight(view.ms[v]->vulnerabilities);
  }

  std::vector<int> x(n, 0);
  std::vector<ResourcePair> remaining = view.budget;
  while (true) {
    bool found = false;
    std::uint32_t pick = 0;
    double pick_priority = 0.0;
    int pick_fit = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
      int fit = max_decoys_for(remaining[view.node_of[v]], view.request[v]);
      if (fit < 1) continue;
      double priority = static_cast<double>(fit) / vuln_weight[v];
      bool wins = !found || priority > pick_priority ||
                  (priority == pick_priority &&
                   (fit > pick_fit ||
                    (fit == pick_fit && ctx.vertex_ids()[v] < ctx.vertex_ids()[pick])));
      if (wins) {
        found = true;
        pick = v;
        pick_priority = priority;
        pick_fit = fit;
      }
    }
    if (!found) break;
    x[pick] += 1;
    spend(remaining[view.node_of[pick]], view.request[pick]);
  }

  AllocationOutcome outcome;
  outcome.x = to_allocation(ctx, x);
  outcome.objective = objective_value(ctx, x);
  outcome.scheme = "sidecar";
  outcome.exact = false;
  outcome.wall_time_s = seconds_since(start);
  return outcome;
}

AllocationOutcome solve_random(const DeploymentPlan& plan, const ObjectiveContext& ctx,
                               std::uint64_t seed) {
  const auto start = Clock::now();
  PlanView view = make_view(plan, ctx);
  const auto n = static_cast<std::uint32_t>(ctx.vertex_count());
  SplitMix64 rng(seed);

  std::vector<int> x(n, 0);
  std::vector<ResourcePair> remaining = view.budget;
  std::vector<std::uint32_t> eligible;
  while (true) {
    eligible.clear();
    for (std::uint32_t v = 0; v < n; ++v) {
      if (max_decoys_for(remaining[view.node_of[v]], view.request[v]) >= 1) {
        eligible.push_back(v);
      }
    }
    if (eligible.empty()) break;
    std::uint32_t pick = eligible[rng.next_below(eligible.size())];
    x[pick] += 1;
    spend(remaining[view.node_of[pick]], view.request[pick]);
  }

  AllocationOutcome outcome;
  outcome.x = to_allocation(ctx, x);
  outcome.objective = objective_value(ctx, x);
  outcome.scheme = "random";
  outcome.exact = false;
  outcome.wall_time_s = seconds_since(start);
  return outcome;
}

nlohmann::json outcome_to_json(const AllocationOutcome& outcome) {
  nlohmann::json x = nlohmann::json::object();
  for (const auto& [id, count] : outcome.x.counts) {
    if (count > 0) x[id] = count;
  }
  return {{"scheme", outcome.scheme},
          {"x", std::move(x)},
          {"objective", outcome.objective},
          {"exact", outcome.exact},
          {"wall_time_s", outcome.wall_time_s}};
}

AllocationOutcome outcome_from_json(const nlohmann::json& j) {
  AllocationOutcome outcome;
  outcome.scheme = j.at("scheme").get<std::string>();
  for (const auto& [id, count] : j.at("x").items()) {
    outcome.x.counts[id] = count.get<int>();
  }
  outcome.objective = j.at("objective").get<double>();
  outcome.exact = j.at("exact").get<bool>();
  outcome.wall_time_s = j.at("wall_time_s").get<double>();
  return outcome;
}

}  // namespace decoynet
