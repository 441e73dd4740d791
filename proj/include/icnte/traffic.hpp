#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "icnte/common.hpp"
#include "icnte/minmlu.hpp"
#include "icnte/rng.hpp"
#include "icnte/topology.hpp"

namespace icnte {

inline constexpr double kKB = 1e3;
inline constexpr double kMB = 1e6;

struct Deterministic {
  double size = 0.0;
};

// Pareto with shape alpha and scale (minimum) x_m.
struct Pareto {
  double shape = 1.5;
  double scale = 0.0;
};

// `small` with probability 1 - p_large, otherwise `large`.
struct Bimodal {
  double small = 10 * kKB;
  double large = 10 * kMB;
  double p_large = 0.0;
};

class SizeDistribution {
 public:
  using Variant = std::variant<Deterministic, Pareto, Bimodal>;

  SizeDistribution(Variant v) : v_(v) { validate(); }  // NOLINT(implicit)

  static SizeDistribution deterministic(double size) { return Variant{Deterministic{size}}; }

  static SizeDistribution pareto_with_mean(double mean, double shape = 1.5) {
    if (!(shape > 1.0)) throw Error("pareto shape must exceed 1 for a finite mean");
    return Variant{Pareto{shape, mean * (shape - 1.0) / shape}};
  }

  static SizeDistribution bimodal_with_mean(double mean, double small = 10 * kKB,
                                            double large = 10 * kMB) {
    if (!(small < large)) throw Error("bimodal sizes must satisfy small < large");
    const double p = (mean - small) / (large - small);
    if (!(p >= 0.0 && p <= 1.0)) throw Error("bimodal mean outside [small, large]");
    return Variant{Bimodal{small, large, p}};
  }

  const Variant& variant() const noexcept { return v_; }

  double mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Deterministic>) {
            return d.size;
          } else if constexpr (std::is_same_v<T, Pareto>) {
            return d.shape * d.scale / (d.shape - 1.0);
          } else {
            return (1.0 - d.p_large) * d.small + d.p_large * d.large;
          }
        },
        v_);
  }

  // Inverse CDF at probability p in [0, 1).
  double quantile(double p) const {
    return std::visit(
        [p](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Deterministic>) {
            return d.size;
          } else if constexpr (std::is_same_v<T, Pareto>) {
            return d.scale * std::pow(1.0 - p, -1.0 / d.shape);
          } else {
            return p < 1.0 - d.p_large ? d.small : d.large;
          }
        },
        v_);
  }

  // One uniform draw per sample, by inversion.
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  std::string describe() const {
    return std::visit(
        [](const auto& d) -> std::string {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Deterministic>) {
            return "deterministic(size=" + text::format_double(d.size) + ")";
          } else if constexpr (std::is_same_v<T, Pareto>) {
            return "pareto(shape=" + text::format_double(d.shape) +
                   ",scale=" + text::format_double(d.scale) + ")";
          } else {
            return "bimodal(small=" + text::format_double(d.small) +
                   ",large=" + text::format_double(d.large) +
                   ",p_large=" + text::format_double(d.p_large) + ")";
          }
        },
        v_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Deterministic>) {
            if (!(d.size > 0.0)) throw Error("content size must be positive");
          } else if constexpr (std::is_same_v<T, Pareto>) {
            if (!(d.shape > 1.0)) throw Error("pareto shape must exceed 1 for a finite mean");
            if (!(d.scale > 0.0)) throw Error("pareto scale must be positive");
          } else {
            if (!(d.small > 0.0 && d.large > 0.0)) throw Error("bimodal sizes must be positive");
            if (!(d.p_large >= 0.0 && d.p_large <= 1.0))
              throw Error("bimodal p_large outside [0,1]");
          }
        },
        v_);
  }

  Variant v_;
};

struct FlowArrival {
  std::uint64_t flow_id = 0;
  NodePair pair;
  double arrival_time = 0.0;  // seconds
  double size = 0.0;          // bytes

  bool operator==(const FlowArrival&) const = default;
};

// Poisson arrivals for one pair on its own stream, seeded from the master
// seed and the pair's node ids so that other pairs never perturb it.
inline std::vector<FlowArrival> generate_pair_arrivals(NodePair pair, double rate,
                                                       const SizeDistribution& dist,
                                                       double horizon, std::uint64_t seed) {
  std::vector<FlowArrival> out;
  if (rate <= 0.0) return out;
  Rng rng(derive_seed(seed, pair.src.value, pair.dst.value));
  double t = 0.0;
  for (;;) {
    t += rng.exponential(rate);
    if (t >= horizon) break;
    out.push_back(FlowArrival{0, pair, t, dist.sample(rng)});
  }
  return out;
}

// Merged, time-ordered arrivals for every pair over [0, horizon). The
// per-pair rate is offered_load / mean(dist). Flow ids follow arrival order.
inline std::vector<FlowArrival> generate_arrivals(const DemandMatrix& demands,
                                                  const SizeDistribution& dist, double horizon,
                                                  std::uint64_t seed) {
  if (!(horizon > 0.0)) throw Error("horizon must be positive");
  const double mean = dist.mean();
  if (!std::isfinite(mean) || !(mean > 0.0)) throw Error("size distribution has no finite mean");
  std::vector<FlowArrival> all;
  for (const auto& [pair, d] : demands.entries()) {
    auto part = generate_pair_arrivals(pair, d.offered_load() / mean, dist, horizon, seed);
    all.insert(all.end(), part.begin(), part.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const FlowArrival& a, const FlowArrival& b) {
    if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
    return a.pair < b.pair;
  });
  for (std::size_t i = 0; i < all.size(); ++i) all[i].flow_id = i;
  return all;
}

// Order-sensitive fingerprint of an arrival stream.
inline std::uint64_t stream_hash(std::span<const FlowArrival> arrivals) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& a : arrivals) {
    h = fnv1a_u64(a.flow_id, h);
    h = fnv1a_u64(a.pair.src.value, h);
    h = fnv1a_u64(a.pair.dst.value, h);
    h = fnv1a_u64(std::bit_cast<std::uint64_t>(a.arrival_time), h);
    h = fnv1a_u64(std::bit_cast<std::uint64_t>(a.size), h);
  }
  return h;
}

inline constexpr std::string_view kTrafficHeader = "src,dst,rate_mbps";

// Reads a traffic matrix; rates are average offered load in Mbps. Every
// pair gets `mean_size` as its mean content size.
inline DemandMatrix parse_traffic_matrix(std::string_view content, const Topology& topo,
                                         double mean_size = 3 * kMB) {
  DemandMatrix dm;
  std::set<NodePair> seen;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw : text::lines(content)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kTrafficHeader)
        throw ParseError(line_no, "expected header '" + std::string(kTrafficHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
    const auto src = topo.find_node(f[0]);
    if (!src) throw ParseError(line_no, "unknown node " + std::string(f[0]));
    const auto dst = topo.find_node(f[1]);
    if (!dst) throw ParseError(line_no, "unknown node " + std::string(f[1]));
    if (*src == *dst) throw ParseError(line_no, "demand from a node to itself");
    const auto rate = text::parse_double(f[2]);
    if (!rate || !std::isfinite(*rate)) throw ParseError(line_no, "malformed rate");
    if (*rate < 0.0) throw ParseError(line_no, "negative rate");
    const NodePair pair{*src, *dst};
    if (!seen.insert(pair).second)
      throw ParseError(line_no, "duplicate pair " + topo.pair_name(pair));
    dm.set_load(pair, mbps_to_bytes_per_second(*rate), mean_size);
  }
  if (!header_seen && line_no > 0) throw ParseError(line_no, "missing header");
  return dm;
}

// Shortest decimal Mbps string that parses back to the same demand.
inline std::string format_rate_mbps(const Demand& d) {
  const double mbps = bytes_per_second_to_mbps(d.offered_load());
  for (int sig = 1; sig < 17; ++sig) {
    auto s = text::format_double(mbps, sig);
    const auto back = text::parse_double(s);
    if (back && mbps_to_bytes_per_second(*back) / d.mean_size == d.arrival_rate) return s;
  }
  return text::format_double(mbps);
}

inline std::string serialize_traffic_matrix(const Topology& topo, const DemandMatrix& dm) {
  std::string out(kTrafficHeader);
  out += '\n';
  for (const auto& [pair, d] : dm.entries()) {
    out += topo.node_name(pair.src) + ',' + topo.node_name(pair.dst) + ',' +
           format_rate_mbps(d) + '\n';
  }
  return out;
}

}  // namespace icnte
