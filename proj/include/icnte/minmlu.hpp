#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icnte/common.hpp"
#include "icnte/kpaths.hpp"
#include "icnte/simplex.hpp"
#include "icnte/topology.hpp"

namespace icnte {

struct Demand {
  double arrival_rate = 0.0;  // flows/second
  double mean_size = 0.0;     // bytes

  double offered_load() const noexcept { return arrival_rate * mean_size; }
  bool operator==(const Demand&) const = default;
};

// Per-pair Poisson arrival rate and mean content size.
class DemandMatrix {
 public:
  void set(NodePair pair, Demand d) {
    if (pair.src == pair.dst) throw Error("demand from a node to itself");
    if (!(d.arrival_rate >= 0.0) || !std::isfinite(d.arrival_rate))
      throw Error("arrival rate must be non-negative");
    if (!(d.mean_size > 0.0) || !std::isfinite(d.mean_size))
      throw Error("mean content size must be positive");
    entries_[pair] = d;
  }

  // Sets the pair from an offered load in bytes/second.
  void set_load(NodePair pair, double load_bytes_per_s, double mean_size) {
    set(pair, Demand{load_bytes_per_s / mean_size, mean_size});
  }

  const std::map<NodePair, Demand>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  double offered_load(NodePair pair) const {
    const auto it = entries_.find(pair);
    return it == entries_.end() ? 0.0 : it->second.offered_load();
  }

  std::vector<NodePair> pairs() const {
    std::vector<NodePair> out;
    out.reserve(entries_.size());
    for (const auto& [p, d] : entries_) out.push_back(p);
    return out;
  }

  bool operator==(const DemandMatrix&) const = default;

 private:
  std::map<NodePair, Demand> entries_;
};

inline DemandMatrix scale_demands(const DemandMatrix& demands, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error("scale factor must be positive");
  DemandMatrix out;
  for (const auto& [pair, d] : demands.entries())
    out.set(pair, Demand{d.arrival_rate * factor, d.mean_size});
  return out;
}

// Per-pair split probabilities over the pair's PathSet, in PathSet order.
struct WeightAssignment {
  std::map<NodePair, std::vector<double>> weights;

  const std::vector<double>& at(NodePair p) const {
    const auto it = weights.find(p);
    if (it == weights.end()) throw Error("no weights for demand pair");
    return it->second;
  }
};

inline void validate_weight_vector(std::span<const double> w) {
  if (w.empty()) throw Error("empty weight vector");
  double sum = 0.0;
  for (const double v : w) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("weight outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("weights do not sum to 1");
}

inline void validate_weights(const WeightAssignment& wa, const PathSetMap& pathsets) {
  for (const auto& [pair, w] : wa.weights) {
    validate_weight_vector(w);
    const auto it = pathsets.find(pair);
    if (it == pathsets.end() || it->second.size() != w.size())
      throw Error("weight vector length does not match pathset");
  }
}

struct MinMluResult {
  WeightAssignment weights;
  double mlu = 0.0;                   // max link utilization of `weights`
  double lp_objective = 0.0;          // t as reported by the solver
  std::vector<double> utilizations;   // indexed by LinkId
  bool feasible = true;               // mlu <= 1
};

// u_e = sum over paths through e of lambda * pi * zbar, divided by c_e.
inline std::vector<double> link_utilizations(const Topology& topo, const DemandMatrix& demands,
                                             const PathSetMap& pathsets,
                                             const WeightAssignment& weights) {
  std::vector<double> load(topo.link_count(), 0.0);
  for (const auto& [pair, d] : demands.entries()) {
    const double offered = d.offered_load();
    if (offered == 0.0) continue;
    const auto ps = pathsets.find(pair);
    if (ps == pathsets.end()) throw Error("no pathset for " + topo.pair_name(pair));
    const auto& w = weights.at(pair);
    if (w.size() != ps->second.size())
      throw Error("weight vector length mismatch for " + topo.pair_name(pair));
    for (std::size_t k = 0; k < w.size(); ++k)
      for (const auto lid : ps->second.paths[k].links) load[lid.value] += offered * w[k];
  }
  for (const auto& l : topo.links()) load[l.id.value] /= l.capacity;
  return load;
}

// Solves
//   minimize t  s.t.  sum_k pi_sd^k = 1,  u_e <= t for every link,  pi >= 0
// with demand pairs in sorted order and paths in PathSet order. The
// `t <= 1` bound is not imposed; an optimum above 1 is reported with
// feasible = false. Zero-load pairs get (1, 0, ..., 0).
inline MinMluResult compute_min_mlu_weights(const Topology& topo, const DemandMatrix& demands,
                                            const PathSetMap& pathsets) {
  MinMluResult result;
  struct Block {
    NodePair pair;
    const PathSet* paths;
    double load;
    std::size_t first_var;
  };
  std::vector<Block> blocks;
  std::size_t num_vars = 0;
  for (const auto& [pair, d] : demands.entries()) {
    const auto it = pathsets.find(pair);
    const double load = d.offered_load();
    if (load == 0.0) {
      const std::size_t k = it == pathsets.end() ? 1 : std::max<std::size_t>(1, it->second.size());
      std::vector<double> w(k, 0.0);
      w[0] = 1.0;
      result.weights.weights[pair] = std::move(w);
      continue;
    }
    if (it == pathsets.end() || it->second.empty())
      throw Error("empty pathset for loaded demand " + topo.pair_name(pair));
    blocks.push_back(Block{pair, &it->second, load, num_vars});
    num_vars += it->second.size();
  }

  const std::size_t t_var = num_vars;
  lp::Problem lp;
  lp.num_vars = num_vars + 1;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.objective[t_var] = 1.0;

  for (const auto& b : blocks) {
    lp::Row row;
    row.sense = lp::Sense::Equal;
    row.rhs = 1.0;
    for (std::size_t k = 0; k < b.paths->size(); ++k) row.coeffs.emplace_back(b.first_var + k, 1.0);
    lp.rows.push_back(std::move(row));
  }
  std::vector<lp::Row> link_rows(topo.link_count());
  for (const auto& b : blocks) {
    for (std::size_t k = 0; k < b.paths->size(); ++k) {
      for (const auto lid : b.paths->paths[k].links) {
        const double c = topo.link(lid).capacity;
        link_rows[lid.value].coeffs.emplace_back(b.first_var + k, b.load / c);
      }
    }
  }
  for (auto& row : link_rows) {
    if (row.coeffs.empty()) continue;
    row.sense = lp::Sense::LessEqual;
    row.rhs = 0.0;
    row.coeffs.emplace_back(t_var, -1.0);
    lp.rows.push_back(std::move(row));
  }

  if (!blocks.empty()) {
    const auto sol = lp::DenseSimplex::solve(lp);
    if (sol.status != lp::Status::Optimal) throw Error("min-MLU linear program failed");
    result.lp_objective = sol.x[t_var];
    for (const auto& b : blocks) {
      std::vector<double> w(b.paths->size());
      double sum = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = std::clamp(sol.x[b.first_var + k], 0.0, 1.0);
        sum += w[k];
      }
      for (auto& v : w) v /= sum;
      result.weights.weights[b.pair] = std::move(w);
    }
  }

  result.utilizations = link_utilizations(topo, demands, pathsets, result.weights);
  result.mlu = result.utilizations.empty()
                   ? 0.0
                   : *std::max_element(result.utilizations.begin(), result.utilizations.end());
  result.feasible = result.mlu <= 1.0;
  return result;
}

inline constexpr std::string_view kWeightsHeader = "src,dst,path_index,weight";

inline std::string serialize_weights(const Topology& topo, const WeightAssignment& wa) {
  std::string out(kWeightsHeader);
  out += '\n';
  for (const auto& [pair, w] : wa.weights) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      out += topo.node_name(pair.src) + ',' + topo.node_name(pair.dst) + ',' +
             std::to_string(k) + ',' + text::format_double(w[k], 12) + '\n';
    }
  }
  return out;
}

// Reads the weight export back. Each vector is renormalized to absorb the
// 12-digit rounding and must list path indices 0..K-1 in order.
inline WeightAssignment parse_weights(std::string_view content, const Topology& topo) {
  WeightAssignment wa;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw : text::lines(content)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kWeightsHeader) throw ParseError(line_no, "expected weights header");
      header_seen = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
    const auto src = topo.find_node(f[0]);
    const auto dst = topo.find_node(f[1]);
    if (!src || !dst) throw ParseError(line_no, "unknown node");
    const auto idx = text::parse_int(f[2]);
    const auto w = text::parse_double(f[3]);
    if (!idx || !w) throw ParseError(line_no, "malformed number");
    auto& vec = wa.weights[NodePair{*src, *dst}];
    if (*idx != static_cast<std::int64_t>(vec.size()))
      throw ParseError(line_no, "path indices must be consecutive from 0");
    if (!(*w >= 0.0 && *w <= 1.0)) throw ParseError(line_no, "weight outside [0,1]");
    vec.push_back(*w);
  }
  for (auto& [pair, w] : wa.weights) {
    double sum = 0.0;
    for (const double v : w) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) throw Error("weights for " + topo.pair_name(pair) + " do not sum to 1");
    for (auto& v : w) v /= sum;
  }
  return wa;
}

}  // namespace icnte
