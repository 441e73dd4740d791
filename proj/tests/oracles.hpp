#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "icnte/icnte.hpp"

namespace icnte::oracle {

struct SimplePath {
  std::vector<NodeId> nodes;
  double weight = 0.0;
};

// Every simple src->dst path by depth-first enumeration, sorted by
// (weight, node sequence). Weights are summed front to back.
inline std::vector<SimplePath> all_simple_paths(const Topology& topo, NodeId src, NodeId dst) {
  std::vector<SimplePath> out;
  std::vector<NodeId> stack{src};
  std::vector<char> on_stack(topo.node_count(), 0);
  on_stack[src.value] = 1;
  std::function<void(double)> dfs = [&](double w) {
    const NodeId u = stack.back();
    if (u == dst) {
      out.push_back({stack, w});
      return;
    }
    for (const auto& l : topo.links()) {
      if (l.src != u || on_stack[l.dst.value]) continue;
      stack.push_back(l.dst);
      on_stack[l.dst.value] = 1;
      dfs(w + l.ospf_weight);
      on_stack[l.dst.value] = 0;
      stack.pop_back();
    }
  };
  dfs(0.0);
  std::sort(out.begin(), out.end(), [](const SimplePath& a, const SimplePath& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    return a.nodes < b.nodes;
  });
  return out;
}

// Random directed graph on n nodes named "n0".."n{n-1}" with small integer
// weights so that equal-weight ties are common.
inline Topology random_graph(Rng& rng, std::size_t n, double density, int max_weight = 3) {
  std::vector<LinkSpec> specs;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v || rng.uniform() >= density) continue;
      const double w = 1.0 + static_cast<double>(rng.next_u64() % static_cast<std::uint64_t>(max_weight));
      const double cap = (1.0 + static_cast<double>(rng.next_u64() % 4)) * kMB;
      specs.push_back({"n" + std::to_string(u), "n" + std::to_string(v), cap, 0.0, w});
    }
  if (specs.empty()) specs.push_back({"n0", "n1", kMB, 0.0, 1.0});
  return Topology::from_links(std::move(specs));
}

// Enumerates every point of the probability simplex in dimension k with
// coordinates on a 1/steps grid.
inline std::vector<std::vector<double>> simplex_grid(std::size_t k, int steps) {
  std::vector<std::vector<double>> out;
  std::vector<int> counts(k, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == k) {
      counts[i] = left;
      std::vector<double> w(k);
      for (std::size_t j = 0; j < k; ++j) w[j] = static_cast<double>(counts[j]) / steps;
      out.push_back(std::move(w));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, steps);
  return out;
}

struct GridDemand {
  std::vector<std::vector<std::size_t>> path_links;  // link indices per path
  double load = 0.0;                                 // bytes/second
};

// Exhaustive search of the product of per-demand simplex grids at
// resolution 1/steps: true if some grid point has max link utilization
// below `bound`. Branch and bound over boxes of integer path counts; a box
// is discarded when a valid lower bound on some link's utilization over
// every grid point in the box already reaches `bound`.
inline bool grid_point_below(const std::vector<GridDemand>& demands,
                             const std::vector<double>& capacity, double bound, int steps) {
  const std::size_t nd = demands.size();
  const std::size_t nl = capacity.size();
  // on[d][l][k]: path k of demand d crosses link l
  std::vector<std::vector<std::vector<char>>> on(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    on[d].assign(nl, std::vector<char>(demands[d].path_links.size(), 0));
    for (std::size_t k = 0; k < demands[d].path_links.size(); ++k)
      for (const auto l : demands[d].path_links[k]) on[d][l][k] = 1;
  }
  using Box = std::vector<std::vector<std::pair<int, int>>>;  // [d][k] = (lo, hi)
  Box root(nd);
  for (std::size_t d = 0; d < nd; ++d) root[d].assign(demands[d].path_links.size(), {0, steps});

  const auto tighten = [&](Box& b) -> bool {
    for (auto& ranges : b) {
      int sum_lo = 0, sum_hi = 0;
      for (const auto& [lo, hi] : ranges) {
        sum_lo += lo;
        sum_hi += hi;
      }
      if (sum_lo > steps || sum_hi < steps) return false;
      for (auto& [lo, hi] : ranges) {
        lo = std::max(lo, steps - (sum_hi - hi));
        hi = std::min(hi, steps - (sum_lo - lo));
      }
    }
    return true;
  };
  const auto lower_bound_reached = [&](const Box& b) {
    for (std::size_t l = 0; l < nl; ++l) {
      double load = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        int in_lo = 0, out_hi = 0;
        for (std::size_t k = 0; k < b[d].size(); ++k) {
          if (on[d][l][k]) in_lo += b[d][k].first;
          else out_hi += b[d][k].second;
        }
        load += demands[d].load * std::max(in_lo, steps - out_hi) / steps;
      }
      if (load / capacity[l] >= bound) return true;
    }
    return false;
  };
  std::function<bool(Box&)> search = [&](Box& b) -> bool {
    if (!tighten(b) || lower_bound_reached(b)) return false;
    std::size_t sd = 0, sk = 0;
    int width = 0;
    for (std::size_t d = 0; d < nd; ++d)
      for (std::size_t k = 0; k < b[d].size(); ++k)
        if (b[d][k].second - b[d][k].first > width) {
          width = b[d][k].second - b[d][k].first;
          sd = d;
          sk = k;
        }
    if (width == 0) return true;  // a single grid point whose exact utilization is below bound
    const int mid = b[sd][sk].first + width / 2;
    Box left = b, right = b;
    left[sd][sk].second = mid;
    right[sd][sk].first = mid + 1;
    return search(left) || search(right);
  };
  return search(root);
}

// Exhaustive minimum of the max link utilization over the grid.
inline double grid_minimum(const std::vector<GridDemand>& demands,
                           const std::vector<double>& capacity, int steps) {
  std::vector<std::vector<std::vector<double>>> grids;
  for (const auto& d : demands) grids.push_back(simplex_grid(d.path_links.size(), steps));
  std::vector<double> load(capacity.size(), 0.0);
  double best = kInfinity;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == demands.size()) {
      double worst = 0.0;
      for (std::size_t l = 0; l < load.size(); ++l) worst = std::max(worst, load[l] / capacity[l]);
      best = std::min(best, worst);
      return;
    }
    for (const auto& w : grids[i]) {
      for (std::size_t k = 0; k < w.size(); ++k)
        for (const auto l : demands[i].path_links[k]) load[l] += demands[i].load * w[k];
      rec(i + 1);
      for (std::size_t k = 0; k < w.size(); ++k)
        for (const auto l : demands[i].path_links[k]) load[l] -= demands[i].load * w[k];
    }
  };
  rec(0);
  return best;
}

// Small random min-MLU instance: a random graph, up to `max_demands` random
// reachable pairs, and candidate paths taken from exhaustive enumeration
// (not from the k-shortest-path code under test).
struct LpInstance {
  Topology topo;
  DemandMatrix demands;
  PathSetMap pathsets;
  std::vector<GridDemand> grid;
  std::vector<double> capacity;
};

inline LpInstance random_lp_instance(Rng& rng, std::size_t max_nodes = 5,
                                     std::size_t max_demands = 3, std::size_t max_k = 3) {
  for (;;) {
    LpInstance inst{random_graph(rng, 3 + rng.next_u64() % (max_nodes - 2), 0.6), {}, {}, {}, {}};
    const auto& topo = inst.topo;
    const std::size_t k = 1 + rng.next_u64() % max_k;
    const std::size_t want = 1 + rng.next_u64() % max_demands;
    std::map<NodePair, GridDemand> by_pair;
    for (int tries = 0; tries < 20 && inst.demands.size() < want; ++tries) {
      const NodePair p{NodeId{static_cast<std::uint32_t>(rng.next_u64() % topo.node_count())},
                       NodeId{static_cast<std::uint32_t>(rng.next_u64() % topo.node_count())}};
      if (p.src == p.dst || inst.demands.entries().contains(p)) continue;
      const auto all = all_simple_paths(topo, p.src, p.dst);
      if (all.empty()) continue;
      const double load = (0.2 + 1.3 * rng.uniform()) * kMB;
      inst.demands.set_load(p, load, kMB);
      PathSet set{p.src, p.dst, {}};
      GridDemand g;
      g.load = load;
      for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
        std::vector<LinkId> links;
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j + 1 < all[i].nodes.size(); ++j) {
          const auto l = *topo.link_between(all[i].nodes[j], all[i].nodes[j + 1]);
          links.push_back(l.id);
          idx.push_back(l.id.value);
        }
        set.paths.push_back(make_path(topo, links));
        g.path_links.push_back(std::move(idx));
      }
      inst.pathsets[p] = std::move(set);
      by_pair[p] = std::move(g);
    }
    if (inst.demands.empty()) continue;
    for (auto& [p, g] : by_pair) inst.grid.push_back(std::move(g));  // demand-map order
    for (const auto& l : topo.links()) inst.capacity.push_back(l.capacity);
    return inst;
  }
}

// Link utilizations of a split, summed directly from the grid description.
inline std::vector<double> utilizations(const LpInstance& inst, const WeightAssignment& w) {
  std::vector<double> load(inst.capacity.size(), 0.0);
  std::size_t i = 0;
  for (const auto& [pair, d] : inst.demands.entries()) {
    const auto& g = inst.grid[i++];
    const auto& pi = w.at(pair);
    for (std::size_t k = 0; k < g.path_links.size(); ++k)
      for (const auto l : g.path_links[k]) load[l] += g.load * pi[k];
  }
  for (std::size_t l = 0; l < load.size(); ++l) load[l] /= inst.capacity[l];
  return load;
}

// Max-min fair rates by literal water filling: all unfrozen flows rise
// together until some link fills, then the flows crossing it freeze.
inline std::vector<double> water_fill(const std::vector<double>& capacity,
                                      const std::vector<std::vector<std::size_t>>& flow_links) {
  const std::size_t nf = flow_links.size();
  std::vector<double> rate(nf, 0.0);
  std::vector<char> frozen(nf, 0);
  std::size_t left = nf;
  while (left > 0) {
    double step = kInfinity;
    for (std::size_t l = 0; l < capacity.size(); ++l) {
      double used = 0.0;
      std::size_t crossing = 0;
      for (std::size_t f = 0; f < nf; ++f) {
        if (std::find(flow_links[f].begin(), flow_links[f].end(), l) == flow_links[f].end()) continue;
        used += rate[f];
        crossing += !frozen[f];
      }
      if (crossing) step = std::min(step, (capacity[l] - used) / static_cast<double>(crossing));
    }
    for (std::size_t f = 0; f < nf; ++f)
      if (!frozen[f]) rate[f] += step;
    for (std::size_t l = 0; l < capacity.size(); ++l) {
      double used = 0.0;
      for (std::size_t f = 0; f < nf; ++f)
        if (std::find(flow_links[f].begin(), flow_links[f].end(), l) != flow_links[f].end())
          used += rate[f];
      if (used < capacity[l] * (1.0 - 1e-12)) continue;
      for (std::size_t f = 0; f < nf; ++f) {
        if (frozen[f]) continue;
        if (std::find(flow_links[f].begin(), flow_links[f].end(), l) == flow_links[f].end()) continue;
        frozen[f] = 1;
        --left;
      }
    }
  }
  return rate;
}

}  // namespace icnte::oracle
