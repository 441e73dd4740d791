#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "icnte/common.hpp"
#include "icnte/kpaths.hpp"
#include "icnte/minmlu.hpp"
#include "icnte/rng.hpp"
#include "icnte/topology.hpp"

namespace icnte {

// Per-link normalized backlog in seconds: outstanding bytes routed over the
// link divided by its capacity.
//
// Exact mode tracks the remaining bytes of every active flow as the engine
// reports progress. CounterEstimate mode only sees allocations and drains
// each counter at the link's observed transmission rate.
class ControllerView {
 public:
  enum class Mode { Exact, CounterEstimate };

  explicit ControllerView(const Topology& topo, Mode mode = Mode::Exact)
      : mode_(mode),
        backlog_(topo.link_count(), 0.0),
        capacity_(topo.link_count()),
        active_(topo.link_count(), 0) {
    for (const auto& l : topo.links()) capacity_[l.id.value] = l.capacity;
  }

  Mode mode() const noexcept { return mode_; }
  std::size_t link_count() const noexcept { return backlog_.size(); }

  double backlog(LinkId id) const {
    if (id.value >= backlog_.size()) throw Error("link missing from controller view");
    return backlog_[id.value];
  }

  std::span<const double> backlogs() const noexcept { return backlog_; }

  // A flow of `size` bytes was placed on `path`.
  void on_allocation(const Path& path, double size) {
    if (!(size >= 0.0)) throw Error("negative allocation size");
    for (const auto lid : path.links) {
      check(lid);
      backlog_[lid.value] += size / capacity_[lid.value];
      ++active_[lid.value];
    }
  }

  // `bytes` of a flow on `path` were delivered. Exact mode only.
  void on_progress(const Path& path, double bytes) {
    if (bytes < 0.0) throw Error("negative progress");
    if (mode_ != Mode::Exact) return;
    for (const auto lid : path.links) {
      check(lid);
      auto& b = backlog_[lid.value];
      b = std::max(0.0, b - bytes / capacity_[lid.value]);
    }
  }

  // The flow on `path` finished. In Exact mode a link with no remaining
  // flows is reset to exactly zero.
  void on_completion(const Path& path) {
    for (const auto lid : path.links) {
      check(lid);
      auto& n = active_[lid.value];
      if (n == 0) throw Error("completion on a link with no active flows");
      if (--n == 0 && mode_ == Mode::Exact) backlog_[lid.value] = 0.0;
    }
  }

  // Counter drain over `dt` seconds at the link's aggregate transmission
  // rate, capped at capacity and floored at zero. CounterEstimate only.
  void on_drain(LinkId id, double aggregate_rate, double dt) {
    check(id);
    if (aggregate_rate < 0.0 || dt < 0.0) throw Error("negative drain");
    if (mode_ != Mode::CounterEstimate) return;
    const double c = capacity_[id.value];
    auto& b = backlog_[id.value];
    b = std::max(0.0, b - std::min(c, aggregate_rate) * dt / c);
  }

 private:
  void check(LinkId id) const {
    if (id.value >= backlog_.size()) throw Error("link missing from controller view");
  }

  Mode mode_;
  std::vector<double> backlog_;
  std::vector<double> capacity_;
  std::vector<std::size_t> active_;
};

// Largest link backlog along the path.
inline double path_backlog(const ControllerView& view, const Path& path) {
  double worst = 0.0;
  for (const auto lid : path.links) worst = std::max(worst, view.backlog(lid));
  return worst;
}

// Path index minimizing path_backlog; ties go to the lowest index.
inline std::size_t select_mbp(const ControllerView& view, const PathSet& pathset) {
  if (pathset.empty()) throw Error("empty pathset");
  std::size_t best = 0;
  double best_backlog = path_backlog(view, pathset.paths[0]);
  for (std::size_t k = 1; k < pathset.size(); ++k) {
    const double b = path_backlog(view, pathset.paths[k]);
    if (b < best_backlog) {
      best = k;
      best_backlog = b;
    }
  }
  return best;
}

// Index k with probability weights[k]; consumes exactly one uniform draw.
inline std::size_t select_weighted_random(std::span<const double> weights, Rng& rng) {
  validate_weight_vector(weights);
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) last_positive = k;
    cum += weights[k];
    if (u < cum && weights[k] > 0.0) return k;
  }
  return last_positive;
}

enum class Branch { Mbp, Random };

inline const char* branch_name(Branch b) { return b == Branch::Mbp ? "mbp" : "random"; }

struct Decision {
  std::size_t path_index = 0;
  Branch branch = Branch::Mbp;
};

// Flows of at least `threshold` bytes go through select_mbp, the rest are
// split randomly by `weights` without reading the view. Either branch
// consumes exactly one draw from `rng`, so the random choices made for
// small flows line up across different thresholds.
inline Decision select_thresholded(const ControllerView& view, const PathSet& pathset,
                                   double size, double threshold,
                                   std::span<const double> weights, Rng& rng) {
  if (size >= threshold) {
    const auto k = select_mbp(view, pathset);
    rng.uniform();
    return {k, Branch::Mbp};
  }
  if (weights.size() != pathset.size()) throw Error("weight vector length does not match pathset");
  return {select_weighted_random(weights, rng), Branch::Random};
}

struct MinBacklog {};
struct ThresholdedMinBacklog {
  double threshold = 0.0;  // bytes
};
struct WeightedRandom {};

// A path-selection policy. The weight assignment is used by WeightedRandom
// and by the random branch of ThresholdedMinBacklog.
struct Policy {
  std::variant<MinBacklog, ThresholdedMinBacklog, WeightedRandom> kind;
  WeightAssignment weights;

  static Policy mbp() { return Policy{MinBacklog{}, {}}; }
  static Policy weighted_random(WeightAssignment w) { return Policy{WeightedRandom{}, std::move(w)}; }
  static Policy thresholded(double threshold, WeightAssignment w) {
    if (!(threshold >= 0.0)) throw Error("threshold must be non-negative");
    return Policy{ThresholdedMinBacklog{threshold}, std::move(w)};
  }

  std::string name() const {
    if (std::holds_alternative<MinBacklog>(kind)) return "mbp";
    if (std::holds_alternative<WeightedRandom>(kind)) return "wr";
    return "tmbp:" + text::format_double(std::get<ThresholdedMinBacklog>(kind).threshold);
  }

  Decision decide(const ControllerView& view, NodePair pair, const PathSet& pathset,
                  double size, Rng& rng) const {
    if (std::holds_alternative<MinBacklog>(kind)) return {select_mbp(view, pathset), Branch::Mbp};
    const auto& w = weights.at(pair);
    if (w.size() != pathset.size()) throw Error("weight vector length does not match pathset");
    if (std::holds_alternative<WeightedRandom>(kind))
      return {select_weighted_random(w, rng), Branch::Random};
    return select_thresholded(view, pathset, size, std::get<ThresholdedMinBacklog>(kind).threshold,
                              w, rng);
  }
};

}  // namespace icnte
