#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "icnte/common.hpp"
#include "icnte/topology.hpp"

namespace icnte {

// Loop-free directed path. `nodes` has one more entry than `links`.
struct Path {
  NodeId src;
  NodeId dst;
  std::vector<LinkId> links;
  std::vector<NodeId> nodes;
  double total_weight = 0.0;

  bool operator==(const Path& o) const { return nodes == o.nodes && links == o.links; }
};

// Canonical path order: ascending weight, then lexicographic node sequence.
struct PathOrder {
  bool operator()(const Path& a, const Path& b) const {
    if (a.total_weight != b.total_weight) return a.total_weight < b.total_weight;
    return a.nodes < b.nodes;
  }
};

struct PathSet {
  NodeId src;
  NodeId dst;
  std::vector<Path> paths;

  std::size_t size() const noexcept { return paths.size(); }
  bool empty() const noexcept { return paths.empty(); }
};

using PathSetMap = std::map<NodePair, PathSet>;

// Builds a Path from a link sequence, summing weights front to back so that
// equal sequences always produce bit-identical totals.
inline Path make_path(const Topology& topo, std::span<const LinkId> links) {
  if (links.empty()) throw Error("empty path");
  Path p;
  p.src = topo.link(links.front()).src;
  p.dst = topo.link(links.back()).dst;
  p.nodes.push_back(p.src);
  for (const auto id : links) {
    const auto& l = topo.link(id);
    if (l.src != p.nodes.back()) throw Error("non-contiguous path");
    p.links.push_back(id);
    p.nodes.push_back(l.dst);
    p.total_weight += l.ospf_weight;
  }
  return p;
}

namespace detail {

// Nodes and links hidden from a search. Never mutates the topology.
struct SearchMask {
  std::vector<char> node_blocked;
  std::vector<char> link_blocked;

  explicit SearchMask(const Topology& t)
      : node_blocked(t.node_count(), 0), link_blocked(t.link_count(), 0) {}
};

// Dijkstra over the unmasked subgraph. Labels carry the full node sequence
// so equal-weight ties resolve to the lexicographically smallest path.
// Positive weights guarantee that the lexicographic minimum of the
// shortest paths to a node extends the minimum to its predecessor.
inline std::optional<Path> shortest_path(const Topology& topo, NodeId src, NodeId dst,
                                         const SearchMask& mask) {
  const auto n = topo.node_count();
  std::vector<double> dist(n, kInfinity);
  std::vector<std::vector<NodeId>> seq(n);
  std::vector<std::vector<LinkId>> via(n);
  std::vector<char> settled(n, 0);

  dist[src.value] = 0.0;
  seq[src.value] = {src};
  for (;;) {
    std::optional<std::size_t> u;
    for (std::size_t i = 0; i < n; ++i) {
      if (settled[i] || mask.node_blocked[i] || dist[i] == kInfinity) continue;
      if (!u || dist[i] < dist[*u] || (dist[i] == dist[*u] && seq[i] < seq[*u])) u = i;
    }
    if (!u) return std::nullopt;
    if (*u == dst.value) break;
    settled[*u] = 1;
    for (const auto lid : topo.out_links(NodeId{static_cast<std::uint32_t>(*u)})) {
      if (mask.link_blocked[lid.value]) continue;
      const auto& l = topo.link(lid);
      const auto v = l.dst.value;
      if (settled[v] || mask.node_blocked[v]) continue;
      const double cand = dist[*u] + l.ospf_weight;
      if (cand > dist[v]) continue;
      auto cand_seq = seq[*u];
      cand_seq.push_back(l.dst);
      if (cand == dist[v] && !(cand_seq < seq[v])) continue;
      dist[v] = cand;
      seq[v] = std::move(cand_seq);
      via[v] = via[*u];
      via[v].push_back(lid);
    }
  }
  return make_path(topo, via[dst.value]);
}

}  // namespace detail

// Minimum-weight src->dst path, or nullopt when dst is unreachable.
inline std::optional<Path> dijkstra_shortest(const Topology& topo, NodeId src, NodeId dst) {
  if (!topo.contains(src) || !topo.contains(dst)) throw Error("unknown node");
  if (src == dst) throw Error("source equals destination");
  return detail::shortest_path(topo, src, dst, detail::SearchMask(topo));
}

// Yen's algorithm: up to k loop-free paths in canonical order. An unreachable
// pair yields an empty set.
inline PathSet yen_k_shortest(const Topology& topo, NodeId src, NodeId dst, std::size_t k) {
  if (k == 0) throw Error("k must be positive");
  PathSet out{src, dst, {}};
  auto first = dijkstra_shortest(topo, src, dst);
  if (!first) return out;
  out.paths.push_back(std::move(*first));

  std::set<Path, PathOrder> candidates;
  while (out.paths.size() < k) {
    const Path prev = out.paths.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const NodeId spur = prev.nodes[i];
      detail::SearchMask mask(topo);
      for (const auto& p : out.paths) {
        if (p.nodes.size() > i + 1 &&
            std::equal(prev.nodes.begin(), prev.nodes.begin() + i + 1, p.nodes.begin()))
          mask.link_blocked[p.links[i].value] = 1;
      }
      for (std::size_t j = 0; j < i; ++j) mask.node_blocked[prev.nodes[j].value] = 1;

      auto spur_path = detail::shortest_path(topo, spur, dst, mask);
      if (!spur_path) continue;
      std::vector<LinkId> links(prev.links.begin(), prev.links.begin() + i);
      links.insert(links.end(), spur_path->links.begin(), spur_path->links.end());
      auto cand = make_path(topo, links);
      if (std::find(out.paths.begin(), out.paths.end(), cand) == out.paths.end())
        candidates.insert(std::move(cand));
    }
    if (candidates.empty()) break;
    out.paths.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return out;
}

// One PathSet per demand pair. Unreachable pairs are a hard error.
inline PathSetMap build_pathsets(const Topology& topo, std::span<const NodePair> pairs,
                                 std::size_t k = 3) {
  PathSetMap out;
  for (const auto& pair : pairs) {
    if (out.contains(pair)) continue;
    auto ps = yen_k_shortest(topo, pair.src, pair.dst, k);
    if (ps.empty()) throw Error("no path for demand pair " + topo.pair_name(pair));
    out.emplace(pair, std::move(ps));
  }
  return out;
}

// Debug listing: "SRC,DST,index,weight,N1 N2 N3" per path.
inline std::string format_pathsets(const Topology& topo, const PathSetMap& sets) {
  std::string out = "src,dst,path_index,weight,nodes\n";
  for (const auto& [pair, ps] : sets) {
    for (std::size_t i = 0; i < ps.paths.size(); ++i) {
      const auto& p = ps.paths[i];
      out += topo.node_name(pair.src) + ',' + topo.node_name(pair.dst) + ',' +
             std::to_string(i) + ',' + text::format_double(p.total_weight) + ',';
      for (std::size_t j = 0; j < p.nodes.size(); ++j) {
        if (j) out += ' ';
        out += topo.node_name(p.nodes[j]);
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace icnte
