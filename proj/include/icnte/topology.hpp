#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icnte/common.hpp"

namespace icnte {

// One directed link. Capacity is in bytes/second, latency in seconds.
struct Link {
  LinkId id;
  NodeId src;
  NodeId dst;
  double capacity = 0.0;
  double latency = 0.0;
  double ospf_weight = 1.0;

  bool operator==(const Link&) const = default;
};

// Link description by node name, as read from a topology file.
struct LinkSpec {
  std::string src;
  std::string dst;
  double capacity = 0.0;  // bytes/second
  double latency = 0.0;   // seconds
  double ospf_weight = 1.0;
};

// Immutable capacitated directed graph.
//
// Node ids are assigned in ascending name order and link ids in ascending
// (src, dst) order, so any two topologies built from the same link set are
// identical regardless of input order.
class Topology {
 public:
  Topology() = default;

  static Topology from_links(std::vector<LinkSpec> specs) {
    Topology t;
    for (const auto& s : specs) {
      t.names_.push_back(s.src);
      t.names_.push_back(s.dst);
    }
    std::sort(t.names_.begin(), t.names_.end());
    t.names_.erase(std::unique(t.names_.begin(), t.names_.end()), t.names_.end());

    const auto n = t.names_.size();
    t.pair_index_.assign(n * n, -1);
    t.out_.assign(n, {});

    std::vector<Link> links;
    links.reserve(specs.size());
    for (const auto& s : specs) {
      if (s.src == s.dst) throw Error("self-loop on node " + s.src);
      if (!(s.capacity > 0.0) || !std::isfinite(s.capacity))
        throw Error("non-positive capacity on link " + s.src + "->" + s.dst);
      if (!(s.ospf_weight > 0.0) || !std::isfinite(s.ospf_weight))
        throw Error("non-positive ospf weight on link " + s.src + "->" + s.dst);
      if (!(s.latency >= 0.0) || !std::isfinite(s.latency))
        throw Error("negative latency on link " + s.src + "->" + s.dst);
      Link l;
      l.src = *t.find_node(s.src);
      l.dst = *t.find_node(s.dst);
      l.capacity = s.capacity;
      l.latency = s.latency;
      l.ospf_weight = s.ospf_weight;
      links.push_back(l);
    }
    std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
      return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
    });
    for (std::size_t i = 0; i < links.size(); ++i) {
      auto& l = links[i];
      auto& slot = t.pair_index_[l.src.value * n + l.dst.value];
      if (slot >= 0)
        throw Error("duplicate link " + t.names_[l.src.value] + "->" +
                    t.names_[l.dst.value]);
      l.id = LinkId{static_cast<std::uint32_t>(i)};
      slot = static_cast<std::int32_t>(i);
      t.out_[l.src.value].push_back(l.id);
    }
    t.links_ = std::move(links);
    return t;
  }

  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t link_count() const noexcept { return links_.size(); }

  std::span<const Link> links() const noexcept { return links_; }
  const Link& link(LinkId id) const { return links_.at(id.value); }

  // Outgoing links of u, ordered by destination id.
  std::span<const LinkId> out_links(NodeId u) const { return out_.at(u.value); }

  const std::string& node_name(NodeId u) const { return names_.at(u.value); }
  std::span<const std::string> node_names() const noexcept { return names_; }

  std::optional<NodeId> find_node(std::string_view name) const {
    const auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return NodeId{static_cast<std::uint32_t>(it - names_.begin())};
  }

  NodeId node(std::string_view name) const {
    if (auto id = find_node(name)) return *id;
    throw Error("unknown node " + std::string(name));
  }

  bool contains(NodeId u) const noexcept { return u.value < names_.size(); }

  // The directed link u->v, or nullopt if none exists.
  std::optional<Link> link_between(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    const auto idx = pair_index_[u.value * names_.size() + v.value];
    if (idx < 0) return std::nullopt;
    return links_[static_cast<std::size_t>(idx)];
  }

  std::optional<Link> link_between(std::string_view u, std::string_view v) const {
    return link_between(node(u), node(v));
  }

  std::string pair_name(NodePair p) const {
    return node_name(p.src) + "->" + node_name(p.dst);
  }

  bool operator==(const Topology& o) const {
    return names_ == o.names_ && links_ == o.links_;
  }

 private:
  void check_node(NodeId u) const {
    if (!contains(u)) throw Error("unknown node id " + std::to_string(u.value));
  }

  std::vector<std::string> names_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::int32_t> pair_index_;
};

inline constexpr std::string_view kTopologyHeader =
    "src,dst,capacity_mbps,latency_s,ospf_weight";

// Parses the CSV topology format. Lines starting with '#' and blank lines
// are ignored. The first remaining line must be the header; the ospf_weight
// column may be omitted entirely (header and rows), in which case every
// weight is 1.
inline Topology parse_topology(std::string_view content) {
  std::vector<LinkSpec> specs;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  bool header_seen = false;
  std::size_t columns = 5;
  std::size_t line_no = 0;
  for (const auto raw : text::lines(content)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (!header_seen) {
      if (line == kTopologyHeader) {
        columns = 5;
      } else if (line == "src,dst,capacity_mbps,latency_s") {
        columns = 4;
      } else {
        throw ParseError(line_no, "expected header '" + std::string(kTopologyHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != columns)
      throw ParseError(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                    std::to_string(fields.size()));
    LinkSpec s;
    s.src = std::string(fields[0]);
    s.dst = std::string(fields[1]);
    if (s.src.empty() || s.dst.empty()) throw ParseError(line_no, "empty node name");
    const auto mbps = text::parse_double(fields[2]);
    const auto latency = text::parse_double(fields[3]);
    const auto weight = columns == 5 ? text::parse_double(fields[4]) : std::optional(1.0);
    if (!mbps || !latency || !weight) throw ParseError(line_no, "malformed number");
    if (s.src == s.dst) throw ParseError(line_no, "self-loop on node " + s.src);
    if (!(*mbps > 0.0) || !std::isfinite(*mbps))
      throw ParseError(line_no, "capacity must be positive");
    if (!(*weight > 0.0) || !std::isfinite(*weight))
      throw ParseError(line_no, "ospf weight must be positive");
    if (!(*latency >= 0.0) || !std::isfinite(*latency))
      throw ParseError(line_no, "latency must be non-negative");
    if (!seen.emplace(std::pair(s.src, s.dst), line_no).second)
      throw ParseError(line_no, "duplicate link " + s.src + "->" + s.dst);
    s.capacity = mbps_to_bytes_per_second(*mbps);
    s.latency = *latency;
    s.ospf_weight = *weight;
    specs.push_back(std::move(s));
  }
  if (!header_seen) throw ParseError(line_no == 0 ? 1 : line_no, "missing header");
  return Topology::from_links(std::move(specs));
}

// Shortest decimal Mbps string that parses back to exactly `capacity` bytes/s.
inline std::string format_capacity_mbps(double capacity) {
  const double mbps = bytes_per_second_to_mbps(capacity);
  for (int sig = 1; sig < 17; ++sig) {
    auto s = text::format_double(mbps, sig);
    const auto back = text::parse_double(s);
    if (back && mbps_to_bytes_per_second(*back) == capacity) return s;
  }
  return text::format_double(mbps);
}

// Emits the topology file format, one line per directed link, sorted by
// (src, dst) name.
inline std::string serialize_topology(const Topology& t) {
  std::string out(kTopologyHeader);
  out += '\n';
  for (const auto& l : t.links()) {
    out += t.node_name(l.src);
    out += ',';
    out += t.node_name(l.dst);
    out += ',';
    out += format_capacity_mbps(l.capacity);
    out += ',';
    out += text::format_double(l.latency);
    out += ',';
    out += text::format_double(l.ospf_weight);
    out += '\n';
  }
  return out;
}

// Abilene backbone (11 routers, 14 bidirectional trunks). OSPF weights are
// the published Abilene IGP metrics; both directions of IPLS-ATLA run at
// 2480 Mbps, every other trunk at 9920 Mbps, 10 ms per link.
// Kept in sync with data/abilene_topology.csv.
inline constexpr std::string_view kAbileneTopology =
    R"(# Abilene backbone, directed links
# ATLA Atlanta, CHIN Chicago, DNVR Denver, HSTN Houston, IPLS Indianapolis,
# KSCY Kansas City, LOSA Los Angeles, NYCM New York, SNVA Sunnyvale,
# STTL Seattle, WASH Washington
src,dst,capacity_mbps,latency_s,ospf_weight
ATLA,HSTN,9920,0.01,1176
HSTN,ATLA,9920,0.01,1176
ATLA,IPLS,2480,0.01,587
IPLS,ATLA,2480,0.01,587
ATLA,WASH,9920,0.01,846
WASH,ATLA,9920,0.01,846
CHIN,IPLS,9920,0.01,260
IPLS,CHIN,9920,0.01,260
CHIN,NYCM,9920,0.01,700
NYCM,CHIN,9920,0.01,700
DNVR,KSCY,9920,0.01,639
KSCY,DNVR,9920,0.01,639
DNVR,SNVA,9920,0.01,1295
SNVA,DNVR,9920,0.01,1295
DNVR,STTL,9920,0.01,2095
STTL,DNVR,9920,0.01,2095
HSTN,KSCY,9920,0.01,902
KSCY,HSTN,9920,0.01,902
HSTN,LOSA,9920,0.01,1893
LOSA,HSTN,9920,0.01,1893
IPLS,KSCY,9920,0.01,548
KSCY,IPLS,9920,0.01,548
LOSA,SNVA,9920,0.01,366
SNVA,LOSA,9920,0.01,366
NYCM,WASH,9920,0.01,233
WASH,NYCM,9920,0.01,233
SNVA,STTL,9920,0.01,861
STTL,SNVA,9920,0.01,861
)";

inline Topology build_abilene() { return parse_topology(kAbileneTopology); }

}  // namespace icnte
