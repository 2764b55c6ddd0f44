#include "decoynet/attack_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace decoynet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::uint32_t AttackGraph::add_vertex(const std::string& id) {
  auto v = static_cast<std::uint32_t>(ids_.size());
  return add_vertex_copy(id, v);
}

std::uint32_t AttackGraph::add_vertex_copy(const std::string& id, std::uint32_t origin) {
  if (index_.contains(id)) throw std::invalid_argument("duplicate vertex id: " + id);
  auto v = static_cast<std::uint32_t>(ids_.size());
  if (origin > v) throw std::invalid_argument("copy origin does not exist yet");
  ids_.push_back(id);
  index_.emplace(id, v);
  origin_.push_back(origin);
  out_.emplace_back();
  in_.emplace_back();
  return v;
}

std::optional<std::uint32_t> AttackGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t AttackGraph::require_index(const std::string& id) const {
  auto v = index_of(id);
  if (!v) throw std::invalid_argument("unknown vertex id: " + id);
  return *v;
}

void AttackGraph::add_edge(const std::string& from, const std::string& to, double weight) {
  add_edge(require_index(from), require_index(to), weight);
}

void AttackGraph::add_edge(std::uint32_t from, std::uint32_t to, double weight) {
  if (from >= ids_.size() || to >= ids_.size())
    throw std::invalid_argument("edge endpoint out of range");
  if (!(weight > 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("edge weight must be positive and finite");
  // Keep adjacency sorted by neighbor id string; canonical-path walks rely on
  // "first qualifying successor" being the lexicographically smallest.
  auto by_id = [this](const GraphEdge& e, const std::string& id) {
    return ids_[e.to] < id;
  };
  auto& out = out_[from];
  out.insert(std::lower_bound(out.begin(), out.end(), ids_[to], by_id),
             GraphEdge{to, weight});
  auto by_src_id = [this](const GraphEdge& e, const std::string& id) {
    return ids_[e.to] < id;
  };
  auto& in = in_[to];
  in.insert(std::lower_bound(in.begin(), in.end(), ids_[from], by_src_id),
            GraphEdge{from, weight});
  ++edge_count_;
}

bool AttackGraph::has_edge(std::uint32_t from, std::uint32_t to) const {
  for (const auto& e : out_[from]) {
    if (e.to == to) return true;
  }
  return false;
}

std::size_t AttackGraph::original_count() const {
  std::size_t n = 0;
  for (std::uint32_t v = 0; v < origin_.size(); ++v) {
    if (origin_[v] == v) ++n;
  }
  return n;
}

std::vector<std::uint32_t> AttackGraph::topological_order() const {
  std::vector<std::uint32_t> indegree(ids_.size(), 0);
  for (const auto& edges : out_) {
    for (const auto& e : edges) ++indegree[e.to];
  }
  auto cmp = [this](std::uint32_t a, std::uint32_t b) { return ids_[a] < ids_[b]; };
  std::set<std::uint32_t, decltype(cmp)> ready(cmp);
  for (std::uint32_t v = 0; v < ids_.size(); ++v) {
    if (indegree[v] == 0) ready.insert(v);
  }
  std::vector<std::uint32_t> order;
  order.reserve(ids_.size());
  while (!ready.empty()) {
    std::uint32_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (const auto& e : out_[v]) {
      if (--indegree[e.to] == 0) ready.insert(e.to);
    }
  }
  if (order.size() != ids_.size())
    throw std::invalid_argument("graph contains a directed cycle");
  return order;
}

DagCheckResult validate_dag(const AttackGraph& g) {
  const auto n = static_cast<std::uint32_t>(g.vertex_count());
  std::vector<int> color(n, 0);  // 0 white, 1 on stack, 2 done
  std::vector<std::uint32_t> parent(n, n);

  for (std::uint32_t root = 0; root < n; ++root) {
    if (color[root] != 0) continue;
    // Iterative DFS carrying the edge iterator per frame.
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      auto edges = g.out_edges(v);
      if (next < edges.size()) {
        std::uint32_t w = edges[next++].to;
        if (color[w] == 0) {
          color[w] = 1;
          parent[w] = v;
          stack.emplace_back(w, 0);
        } else if (color[w] == 1) {
          // Found a back edge v -> w; unwind the witness.
          std::vector<std::string> cycle;
          for (std::uint32_t u = v;; u = parent[u]) {
            cycle.push_back(g.id_of(u));
            if (u == w) break;
          }
          std::reverse(cycle.begin(), cycle.end());
          return {false, std::move(cycle)};
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return {true, {}};
}

double edge_weight(std::span<const Vulnerability> vulns) {
  if (vulns.empty())
    throw std::invalid_argument("edge weight undefined for an empty vulnerability set");
  double num = 0.0;
  double den = 0.0;
  for (const auto& v : vulns) {
    num += v.em * v.ecm;
    den += v.ecm;
  }
  if (!(den > 0.0)) throw std::invalid_argument("vulnerability ecm values must be positive");
  return num / den;
}

AttackGraph build_attack_graph(
    const std::vector<CallEdge>& call_edges, const DeploymentPlan& plan,
    const std::map<std::string, std::vector<Vulnerability>>& node_vulns) {
  AttackGraph g;
  for (const auto& m : plan.microservices) g.add_vertex(m.id);

  std::unordered_map<std::string, const Microservice*> by_id;
  for (const auto& m : plan.microservices) by_id.emplace(m.id, &m);

  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& [from, to] : call_edges) {
    auto fi = g.index_of(from);
    auto ti = g.index_of(to);
    if (!fi || !ti)
      throw std::invalid_argument("call edge endpoint not in plan: " + from + " -> " + to);
    if (*fi == *ti)
      throw std::invalid_argument("call graph has a self-loop at " + from);
    if (!seen.insert({*fi, *ti}).second) continue;
    g.add_edge(*fi, *ti, edge_weight(by_id.at(to)->vulnerabilities));
  }

  auto dag = validate_dag(g);
  if (!dag.ok) {
    std::string msg = "call graph is cyclic:";
    for (const auto& id : dag.cycle) msg += " " + id;
    throw std::invalid_argument(msg);
  }

  // Container-escape edges between co-located, not-yet-connected pairs,
  // oriented along the call graph's topological order.
  const auto order = g.topological_order();
  std::map<std::string, std::vector<std::uint32_t>> per_node;  // in topo order
  for (std::uint32_t v : order) {
    per_node[by_id.at(g.id_of(v))->node].push_back(v);
  }
  for (const auto& [node_id, members] : per_node) {
    std::span<const Vulnerability> extra;
    if (auto it = node_vulns.find(node_id); it != node_vulns.end()) extra = it->second;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t k = i + 1; k < members.size(); ++k) {
        std::uint32_t a = members[i];
        std::uint32_t b = members[k];
        if (g.has_edge(a, b) || g.has_edge(b, a)) continue;
        std::vector<Vulnerability> combined = by_id.at(g.id_of(b))->vulnerabilities;
        combined.insert(combined.end(), extra.begin(), extra.end());
        g.add_edge(a, b, edge_weight(combined));
      }
    }
  }
  return g;
}

std::optional<std::uint32_t> ApIndex::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const ApIndex::Pair* ApIndex::find_pair(std::uint32_t src, std::uint32_t dst) const {
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::pair{src, dst},
                             [](const Pair& p, const std::pair<std::uint32_t, std::uint32_t>& k) {
                               return std::pair{p.src, p.dst} < k;
                             });
  if (it == pairs_.end() || it->src != src || it->dst != dst) return nullptr;
  return &*it;
}

std::span<const std::uint32_t> ApIndex::pairs_through(std::uint32_t v) const {
  return {through_pairs_.data() + through_offsets_[v],
          through_offsets_[v + 1] - through_offsets_[v]};
}

ApIndex compute_attack_paths(const AttackGraph& g) {
  const auto n = static_cast<std::uint32_t>(g.vertex_count());
  const auto order = g.topological_order();
  std::vector<std::uint32_t> pos(n);
  for (std::uint32_t i = 0; i < n; ++i) pos[order[i]] = i;

  ApIndex idx;
  idx.ids_ = g.vertex_ids();
  for (std::uint32_t v = 0; v < n; ++v) idx.index_.emplace(idx.ids_[v], v);
  idx.betweenness_.assign(n, 0.0);

  // Forward pass per source: distances, minimum-weight path counts, and the
  // Brandes dependency accumulation for classical betweenness. Distance ties
  // are compared exactly; every candidate is a forward-accumulated sum, so
  // deliberately equal weights compare equal bit for bit.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, kInf));
  std::vector<std::vector<PathCount>> sigma(n, std::vector<PathCount>(n, 0));
  std::vector<double> delta(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    auto& d = dist[s];
    auto& sg = sigma[s];
    d[s] = 0.0;
    sg[s] = 1;
    for (std::uint32_t i = pos[s]; i < n; ++i) {
      std::uint32_t u = order[i];
      if (d[u] == kInf) continue;
      for (const auto& e : g.out_edges(u)) {
        double nd = d[u] + e.weight;
        if (nd < d[e.to]) {
          d[e.to] = nd;
          sg[e.to] = sg[u];
        } else if (nd == d[e.to]) {
          sg[e.to] = checked_add(sg[e.to], sg[u]);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    for (std::uint32_t i = n; i-- > pos[s];) {
      std::uint32_t u = order[i];
      if (d[u] == kInf) continue;
      for (const auto& e : g.out_edges(u)) {
        if (d[e.to] == d[u] + e.weight) {
          delta[u] += to_double(sg[u]) / to_double(sg[e.to]) * (1.0 + delta[e.to]);
        }
      }
      if (u != s) idx.betweenness_[u] += delta[u];
    }
  }

  // Per-target backward pass: remaining distances, then a greedy forward walk
  // that always takes the smallest-id successor still on a minimum-weight
  // route. That walk is the lexicographically smallest minimum-weight path.
  std::vector<double> rdist(n);
  for (std::uint32_t t = 0; t < n; ++t) {
    std::fill(rdist.begin(), rdist.end(), kInf);
    rdist[t] = 0.0;
    for (std::uint32_t i = pos[t] + 1; i-- > 0;) {
      std::uint32_t u = order[i];
      for (const auto& e : g.out_edges(u)) {
        if (rdist[e.to] == kInf) continue;
        double cand = e.weight + rdist[e.to];
        if (cand < rdist[u]) rdist[u] = cand;
      }
    }
    for (std::uint32_t s = 0; s < n; ++s) {
      if (s == t || dist[s][t] == kInf) continue;
      ApIndex::Pair p;
      p.src = s;
      p.dst = t;
      p.distance = dist[s][t];
      p.multiplicity = sigma[s][t];
      p.path_begin = static_cast<std::uint32_t>(idx.path_vertices_.size());
      std::uint32_t u = s;
      idx.path_vertices_.push_back(u);
      while (u != t) {
        bool advanced = false;
        for (const auto& e : g.out_edges(u)) {  // sorted by id: first hit wins
          if (rdist[e.to] != kInf && e.weight + rdist[e.to] == rdist[u]) {
            u = e.to;
            idx.path_vertices_.push_back(u);
            advanced = true;
            break;
          }
        }
        if (!advanced) throw std::logic_error("canonical path walk failed to advance");
      }
      p.path_end = static_cast<std::uint32_t>(idx.path_vertices_.size());
      idx.pairs_.push_back(p);
    }
  }

  std::sort(idx.pairs_.begin(), idx.pairs_.end(), [](const auto& a, const auto& b) {
    return std::pair{a.src, a.dst} < std::pair{b.src, b.dst};
  });

  // CSR of pairs whose canonical path passes strictly through each vertex.
  std::vector<std::uint32_t> counts(n + 1, 0);
  for (const auto& p : idx.pairs_) {
    for (std::uint32_t k = p.path_begin + 1; k + 1 < p.path_end; ++k) {
      ++counts[idx.path_vertices_[k] + 1];
    }
  }
  idx.through_offsets_.assign(n + 1, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    idx.through_offsets_[v + 1] = idx.through_offsets_[v] + counts[v + 1];
  }
  idx.through_pairs_.resize(idx.through_offsets_[n]);
  std::vector<std::uint32_t> cursor(idx.through_offsets_.begin(), idx.through_offsets_.end() - 1);
  for (std::uint32_t pi = 0; pi < idx.pairs_.size(); ++pi) {
    const auto& p = idx.pairs_[pi];
    for (std::uint32_t k = p.path_begin + 1; k + 1 < p.path_end; ++k) {
      idx.through_pairs_[cursor[idx.path_vertices_[k]]++] = pi;
    }
  }
  return idx;
}

double betweenness(const ApIndex& idx, const std::string& vertex_id) {
  auto v = idx.index_of(vertex_id);
  if (!v) throw std::invalid_argument("unknown vertex id: " + vertex_id);
  return idx.betweenness_of(*v);
}

nlohmann::json graph_to_json(const AttackGraph& g) {
  nlohmann::json j;
  j["vertices"] = g.vertex_ids();
  j["edges"] = nlohmann::json::array();
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    for (const auto& e : g.out_edges(v)) {
      j["edges"].push_back(
          {{"from", g.id_of(v)}, {"to", g.id_of(e.to)}, {"w", e.weight}});
    }
  }
  return j;
}

AttackGraph graph_from_json(const nlohmann::json& j) {
  AttackGraph g;
  for (const auto& id : j.at("vertices")) g.add_vertex(id.get<std::string>());
  for (const auto& e : j.at("edges")) {
    g.add_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>(),
               e.at("w").get<double>());
  }
  return g;
}

nlohmann::json call_graph_to_json(std::span<const std::string> vertices,
                                  std::span<const CallEdge> edges) {
  nlohmann::json j;
  j["vertices"] = std::vector<std::string>(vertices.begin(), vertices.end());
  j["edges"] = nlohmann::json::array();
  for (const auto& [from, to] : edges) {
    j["edges"].push_back({{"from", from}, {"to", to}});
  }
  return j;
}

std::pair<std::vector<std::string>, std::vector<CallEdge>> call_graph_from_json(
    const nlohmann::json& j) {
  std::vector<std::string> vertices;
  for (const auto& id : j.at("vertices")) vertices.push_back(id.get<std::string>());
  std::vector<CallEdge> edges;
  for (const auto& e : j.at("edges")) {
    edges.emplace_back(e.at("from").get<std::string>(), e.at("to").get<std::string>());
  }
  return {std::move(vertices), std::move(edges)};
}

}  // namespace decoynet
