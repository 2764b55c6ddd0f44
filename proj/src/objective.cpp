#include "decoynet/objective.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace decoynet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double occupancy_ratio(int count) {
  return static_cast<double>(count) / (1.0 + static_cast<double>(count));
}

void require_decoy_free(const AttackGraph& g) {
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
    if (g.is_decoy(v)) throw std::invalid_argument("graph already contains decoy vertices");
  }
}

}  // namespace

ObjectiveContext ObjectiveContext::from_index(const ApIndex& idx) {
  ObjectiveContext ctx;
  ctx.ids_ = idx.vertex_ids();
  for (std::uint32_t v = 0; v < ctx.ids_.size(); ++v) ctx.index_.emplace(ctx.ids_[v], v);
  const auto n = static_cast<std::uint32_t>(ctx.ids_.size());
  ctx.betweenness_.resize(n);
  for (std::uint32_t v = 0; v < n; ++v) ctx.betweenness_[v] = idx.betweenness_of(v);

  ctx.interior_offsets_.push_back(0);
  for (const auto& p : idx.pairs()) {
    auto path = idx.path_of(p);
    if (path.size() < 3) continue;  // no interior vertex, no contribution
    ctx.pair_src_.push_back(p.src);
    ctx.pair_dst_.push_back(p.dst);
    ctx.interior_vertices_.insert(ctx.interior_vertices_.end(), path.begin() + 1,
                                  path.end() - 1);
    ctx.interior_offsets_.push_back(static_cast<std::uint32_t>(ctx.interior_vertices_.size()));
  }

  const auto pair_count = static_cast<std::uint32_t>(ctx.pair_src_.size());
  std::vector<std::uint32_t> vip_counts(n + 1, 0);
  std::vector<std::uint32_t> vep_counts(n + 1, 0);
  for (std::uint32_t p = 0; p < pair_count; ++p) {
    for (std::uint32_t v : ctx.pair_interior(p)) ++vip_counts[v + 1];
    ++vep_counts[ctx.pair_src_[p] + 1];
    ++vep_counts[ctx.pair_dst_[p] + 1];
  }
  ctx.vip_offsets_.assign(n + 1, 0);
  ctx.vep_offsets_.assign(n + 1, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    ctx.vip_offsets_[v + 1] = ctx.vip_offsets_[v] + vip_counts[v + 1];
    ctx.vep_offsets_[v + 1] = ctx.vep_offsets_[v] + vep_counts[v + 1];
  }
  ctx.vip_pairs_.resize(ctx.vip_offsets_[n]);
  ctx.vep_pairs_.resize(ctx.vep_offsets_[n]);
  std::vector<std::uint32_t> vip_cursor(ctx.vip_offsets_.begin(), ctx.vip_offsets_.end() - 1);
  std::vector<std::uint32_t> vep_cursor(ctx.vep_offsets_.begin(), ctx.vep_offsets_.end() - 1);
  for (std::uint32_t p = 0; p < pair_count; ++p) {
    for (std::uint32_t v : ctx.pair_interior(p)) ctx.vip_pairs_[vip_cursor[v]++] = p;
    ctx.vep_pairs_[vep_cursor[ctx.pair_src_[p]]++] = p;
    ctx.vep_pairs_[vep_cursor[ctx.pair_dst_[p]]++] = p;
  }
  return ctx;
}

std::uint32_t ObjectiveContext::require_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::invalid_argument("unknown microservice id: " + id);
  return it->second;
}

std::vector<int> ObjectiveContext::dense_counts(const DecoyAllocation& x) const {
  std::vector<int> dense(ids_.size(), 0);
  for (const auto& [id, count] : x.counts) {
    if (count == 0) continue;
    if (count < 0) throw std::invalid_argument("negative decoy count for " + id);
    dense[require_index(id)] = count;
  }
  return dense;
}

double deceptive_betweenness(const ObjectiveContext& ctx, std::span<const int> x,
                             std::uint32_t vertex) {
  double total = 0.0;
  double down = 1.0 + static_cast<double>(x[vertex]);
  for (std::uint32_t p : ctx.pairs_with_interior(vertex)) {
    double f = (1.0 + x[ctx.pair_src(p)]) * (1.0 + x[ctx.pair_dst(p)]);
    total += f / down;
  }
  return total;
}

double deceptive_betweenness(const ObjectiveContext& ctx, const DecoyAllocation& x,
                             const std::string& vertex_id) {
  auto dense = ctx.dense_counts(x);
  return deceptive_betweenness(ctx, dense, ctx.require_index(vertex_id));
}

double objective_value(const ObjectiveContext& ctx, std::span<const int> x) {
  double total = 0.0;
  const auto pairs = static_cast<std::uint32_t>(ctx.pair_count());
  for (std::uint32_t p = 0; p < pairs; ++p) {
    double interior = 0.0;
    for (std::uint32_t v : ctx.pair_interior(p)) interior += occupancy_ratio(x[v]);
    double f = (1.0 + x[ctx.pair_src(p)]) * (1.0 + x[ctx.pair_dst(p)]);
    total += f * interior;
  }
  return total;
}

double objective_value(const ObjectiveContext& ctx, const DecoyAllocation& x) {
  auto dense = ctx.dense_counts(x);
  return objective_value(ctx, dense);
}

double marginal_gain(const ObjectiveContext& ctx, std::span<const int> x,
                     std::uint32_t vertex) {
  double gain = 0.0;
  double bump = occupancy_ratio(x[vertex] + 1) - occupancy_ratio(x[vertex]);
  for (std::uint32_t p : ctx.pairs_with_interior(vertex)) {
    gain += (1.0 + x[ctx.pair_src(p)]) * (1.0 + x[ctx.pair_dst(p)]) * bump;
  }
  for (std::uint32_t p : ctx.pairs_with_endpoint(vertex)) {
    double interior = 0.0;
    for (std::uint32_t v : ctx.pair_interior(p)) interior += occupancy_ratio(x[v]);
    std::uint32_t other = ctx.pair_src(p) == vertex ? ctx.pair_dst(p) : ctx.pair_src(p);
    gain += (1.0 + x[other]) * interior;
  }
  return gain;
}

double marginal_gain(const ObjectiveContext& ctx, const DecoyAllocation& x,
                     const std::string& vertex_id) {
  auto dense = ctx.dense_counts(x);
  return marginal_gain(ctx, dense, ctx.require_index(vertex_id));
}

AttackGraph build_augmented_graph(const AttackGraph& g, const DecoyAllocation& x) {
  require_decoy_free(g);
  const auto n = static_cast<std::uint32_t>(g.vertex_count());

  std::vector<int> counts(n, 0);
  for (const auto& [id, count] : x.counts) {
    if (count == 0) continue;
    if (count < 0) throw std::invalid_argument("negative decoy count for " + id);
    counts[g.require_index(id)] = count;
  }

  AttackGraph aug;
  // Originals first (indices preserved), then copy classes in origin order.
  std::vector<std::vector<std::uint32_t>> copy_class(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    aug.add_vertex(g.id_of(v));
    copy_class[v].push_back(v);
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    for (int j = 1; j <= counts[v]; ++j) {
      auto id = g.id_of(v) + "#d" + std::to_string(j);
      copy_class[v].push_back(aug.add_vertex_copy(id, v));
    }
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    for (const auto& e : g.out_edges(u)) {
      for (std::uint32_t uc : copy_class[u]) {
        for (std::uint32_t vc : copy_class[e.to]) {
          aug.add_edge(uc, vc, e.weight);
        }
      }
    }
  }
  return aug;
}

DapMetrics count_daps(const AttackGraph& g, const DecoyAllocation& x) {
  require_decoy_free(g);
  AttackGraph aug = build_augmented_graph(g, x);

  const auto an = static_cast<std::uint32_t>(aug.vertex_count());
  const auto order = aug.topological_order();
  std::vector<std::uint32_t> pos(an);
  for (std::uint32_t i = 0; i < an; ++i) pos[order[i]] = i;

  PathCount total_aps = 0;
  PathCount total_daps = 0;
  PathCount deceptive_paths = 0;
  PathCount decoy_sum = 0;

  // Per source: minimum-weight path counts (sigma), counts of minimum-weight
  // paths whose strictly interior vertices are all originals (clean), and the
  // summed number of decoy vertices over all minimum-weight paths (psi,
  // endpoints included). A path through decoy interiors always has an
  // equal-weight original mirror, so the clean DP shares the same distances.
  std::vector<double> dist(an);
  std::vector<PathCount> sigma(an), clean(an), psi(an);
  for (std::uint32_t s = 0; s < an; ++s) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(sigma.begin(), sigma.end(), 0);
    std::fill(clean.begin(), clean.end(), 0);
    std::fill(psi.begin(), psi.end(), 0);
    dist[s] = 0.0;
    sigma[s] = 1;
    clean[s] = 1;
    for (std::uint32_t i = pos[s]; i < an; ++i) {
      std::uint32_t u = order[i];
      if (dist[u] == kInf) continue;
      // u joins every path through it exactly once, when its counts are final
      if (aug.is_decoy(u)) psi[u] = checked_add(psi[u], sigma[u]);
      bool interior_allowed = u == s || !aug.is_decoy(u);
      for (const auto& e : aug.out_edges(u)) {
        double nd = dist[u] + e.weight;
        if (nd < dist[e.to]) {
          dist[e.to] = nd;
          sigma[e.to] = sigma[u];
          psi[e.to] = psi[u];
          clean[e.to] = interior_allowed ? clean[u] : 0;
        } else if (nd == dist[e.to]) {
          sigma[e.to] = checked_add(sigma[e.to], sigma[u]);
          psi[e.to] = checked_add(psi[e.to], psi[u]);
          if (interior_allowed) clean[e.to] = checked_add(clean[e.to], clean[u]);
        }
      }
    }

    const bool src_decoy = aug.is_decoy(s);
    for (std::uint32_t t = 0; t < an; ++t) {
      if (t == s || dist[t] == kInf) continue;
      if (sigma[t] < clean[t]) {
        throw std::logic_error("clean path count exceeds total path count");
      }
      total_aps = checked_add(total_aps, 1);
      // A pair's attack path is deceptive when a decoy sits anywhere on one
      // of its minimum-weight routes, endpoints included.
      bool deceptive = src_decoy || aug.is_decoy(t) || clean[t] < sigma[t];
      if (deceptive) total_daps = checked_add(total_daps, 1);
      PathCount dirty =
          (src_decoy || aug.is_decoy(t)) ? sigma[t] : sigma[t] - clean[t];
      deceptive_paths = checked_add(deceptive_paths, dirty);
      decoy_sum = checked_add(decoy_sum, psi[t]);
    }
  }

  DapMetrics m;
  m.total_aps = to_u64_checked(total_aps);
  m.total_daps = to_u64_checked(total_daps);
  m.dap_fraction = m.total_aps == 0 ? 0.0 : to_double(total_daps) / to_double(total_aps);
  m.decoys_per_dap =
      deceptive_paths == 0 ? 0.0 : to_double(decoy_sum) / to_double(deceptive_paths);
  return m;
}

nlohmann::json dap_metrics_to_json(const DapMetrics& m) {
  return {{"total_aps", m.total_aps},
          {"total_daps", m.total_daps},
          {"dap_fraction", m.dap_fraction},
          {"decoys_per_dap", m.decoys_per_dap}};
}

}  // namespace decoynet
