#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "icnte/common.hpp"
#include "icnte/kpaths.hpp"
#include "icnte/policies.hpp"
#include "icnte/rng.hpp"
#include "icnte/topology.hpp"
#include "icnte/traffic.hpp"

namespace icnte {

// Max-min fair rates by progressive filling: repeatedly take the link with
// the smallest equal share of its residual capacity among its unfrozen
// flows, fix those flows at that share, and charge them to every link they
// cross. Rates are returned in input order.
inline std::vector<double> compute_fair_rates(const Topology& topo,
                                              std::span<const Path* const> paths) {
  const auto nl = topo.link_count();
  std::vector<double> residual(nl);
  std::vector<std::size_t> unfrozen(nl, 0);
  std::vector<std::vector<std::size_t>> on_link(nl);
  for (const auto& l : topo.links()) residual[l.id.value] = l.capacity;
  for (std::size_t f = 0; f < paths.size(); ++f) {
    for (const auto lid : paths[f]->links) {
      if (lid.value >= nl) throw Error("flow path references an unknown link");
      ++unfrozen[lid.value];
      on_link[lid.value].push_back(f);
    }
  }

  std::vector<double> rate(paths.size(), 0.0);
  std::vector<char> frozen(paths.size(), 0);
  std::size_t left = paths.size();
  while (left > 0) {
    std::size_t bottleneck = nl;
    double share = kInfinity;
    for (std::size_t l = 0; l < nl; ++l) {
      if (unfrozen[l] == 0) continue;
      const double s = residual[l] / static_cast<double>(unfrozen[l]);
      if (s < share) {
        share = s;
        bottleneck = l;
      }
    }
    if (bottleneck == nl) throw Error("flow with an empty path");
    for (const auto f : on_link[bottleneck]) {
      if (frozen[f]) continue;
      frozen[f] = 1;
      rate[f] = share;
      --left;
      for (const auto lid : paths[f]->links) {
        residual[lid.value] = std::max(0.0, residual[lid.value] - share);
        --unfrozen[lid.value];
      }
    }
  }
  return rate;
}

struct FairnessCheck {
  double max_relative_excess = 0.0;  // max over links of (load - c) / c
  std::size_t capacity_violations = 0;
  std::size_t bottleneck_violations = 0;

  bool ok() const noexcept { return capacity_violations == 0 && bottleneck_violations == 0; }
};

// Max-min certificate: every link carries at most its capacity, and every
// flow crosses a saturated link on which no other flow gets a higher rate.
inline FairnessCheck check_fair_rates(const Topology& topo, std::span<const Path* const> paths,
                                      std::span<const double> rates, double tol = 1e-9) {
  const auto nl = topo.link_count();
  std::vector<double> load(nl, 0.0);
  std::vector<double> top(nl, 0.0);
  for (std::size_t f = 0; f < paths.size(); ++f) {
    for (const auto lid : paths[f]->links) {
      load[lid.value] += rates[f];
      top[lid.value] = std::max(top[lid.value], rates[f]);
    }
  }
  FairnessCheck out;
  std::vector<char> saturated(nl, 0);
  for (const auto& l : topo.links()) {
    const double excess = (load[l.id.value] - l.capacity) / l.capacity;
    out.max_relative_excess = std::max(out.max_relative_excess, excess);
    if (excess > tol) ++out.capacity_violations;
    saturated[l.id.value] = excess >= -tol;
  }
  for (std::size_t f = 0; f < paths.size(); ++f) {
    bool has_bottleneck = false;
    for (const auto lid : paths[f]->links) {
      if (saturated[lid.value] && rates[f] >= top[lid.value] * (1.0 - tol)) {
        has_bottleneck = true;
        break;
      }
    }
    if (!has_bottleneck || !(rates[f] > 0.0)) ++out.bottleneck_violations;
  }
  return out;
}

// One-way propagation delay along the path.
inline double path_latency(const Topology& topo, const Path& path) {
  double total = 0.0;
  for (const auto lid : path.links) total += topo.link(lid).latency;
  return total;
}

struct FlowRecord {
  std::uint64_t flow_id = 0;
  NodePair pair;
  double size = 0.0;
  double arrival = 0.0;
  std::optional<double> completion;
  double response = 0.0;
  std::size_t path_index = 0;
  Branch branch = Branch::Mbp;
  double delivered = 0.0;  // sum of rate * dt over the flow's lifetime
};

// Transfer time plus the one-way latency of the path and of the (symmetric)
// acknowledgement path back to the source.
inline double response_time(const FlowRecord& flow, const Topology& topo, const Path& path) {
  if (!flow.completion) throw Error("flow " + std::to_string(flow.flow_id) + " has not completed");
  return (*flow.completion - flow.arrival) + 2.0 * path_latency(topo, path);
}

struct DecisionRecord {
  std::uint64_t flow_id = 0;
  std::string policy;
  Branch branch = Branch::Mbp;
  std::size_t path_index = 0;
  std::optional<double> max_backlog;  // absent on the random branch
};

struct LinkStats {
  double peak_utilization = 0.0;
  double mean_utilization = 0.0;  // over the measurement window
};

struct EngineConfig {
  ControllerView::Mode view_mode = ControllerView::Mode::Exact;
  std::uint64_t policy_seed = 0;
  // Link utilization averages cover [measure_from, measure_to); a negative
  // measure_to means "until the last completion".
  double measure_from = 0.0;
  double measure_to = -1.0;
  bool log_decisions = false;
  // Verify the max-min certificate and the Exact view against a from-scratch
  // recomputation at every rate recomputation.
  bool check_invariants = false;
};

struct InvariantStats {
  std::size_t recomputations = 0;
  std::size_t capacity_violations = 0;
  std::size_t bottleneck_violations = 0;
  double max_relative_excess = 0.0;
  double max_view_error = 0.0;  // seconds
};

struct RunResult {
  std::vector<FlowRecord> flows;  // in flow id order
  std::vector<LinkStats> links;   // indexed by LinkId
  std::vector<DecisionRecord> decisions;
  std::size_t event_count = 0;
  double end_time = 0.0;
  InvariantStats invariants;
};

struct ActiveFlowView {
  const FlowRecord* record;
  const Path* path;
  double remaining;
  double rate;
};

// Called after every event with the simulation time and active flows.
using EngineObserver =
    std::function<void(double now, std::span<const ActiveFlowView>, const ControllerView&)>;

class Engine {
 public:
  Engine(const Topology& topo, const PathSetMap& pathsets, const Policy& policy,
         EngineConfig config = {})
      : topo_(topo),
        pathsets_(pathsets),
        policy_(policy),
        config_(config),
        view_(topo, config.view_mode),
        policy_rng_(derive_seed(config.policy_seed, "policy")) {}

  void set_observer(EngineObserver obs) { observer_ = std::move(obs); }

  RunResult run(std::span<const FlowArrival> arrivals) {
    for (std::size_t i = 1; i < arrivals.size(); ++i)
      if (arrivals[i].arrival_time < arrivals[i - 1].arrival_time)
        throw Error("arrivals are not time-sorted");

    result_ = RunResult{};
    result_.flows.reserve(arrivals.size());
    busy_.assign(topo_.link_count(), 0.0);
    peak_.assign(topo_.link_count(), 0.0);
    link_rate_.assign(topo_.link_count(), 0.0);
    now_ = 0.0;

    std::size_t next = 0;
    while (next < arrivals.size() || !active_.empty()) {
      drop_stale();
      const double t_arr = next < arrivals.size() ? arrivals[next].arrival_time : kInfinity;
      const double t_cmp = queue_.empty() ? kInfinity : queue_.top().time;
      if (t_arr == kInfinity && t_cmp == kInfinity) throw Error("engine stalled with active flows");
      // Arrivals go first on equal times.
      if (t_arr <= t_cmp) {
        advance(t_arr);
        admit(arrivals[next++]);
      } else {
        const auto ev = queue_.top();
        queue_.pop();
        advance(ev.time);
        complete(ev.slot);
      }
      ++result_.event_count;
      recompute();
      notify();
    }
    result_.end_time = now_;
    finalize_link_stats();
    return std::move(result_);
  }

 private:
  struct Active {
    std::size_t record;  // index into result_.flows
    const Path* path;
    double remaining;
    double rate = 0.0;
    std::uint64_t version = 0;
  };

  struct Completion {
    double time;
    std::uint64_t flow_id;
    std::size_t slot;
    std::uint64_t version;
  };

  struct Later {
    bool operator()(const Completion& a, const Completion& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.flow_id > b.flow_id;
    }
  };

  const PathSet& pathset_for(NodePair pair) const {
    const auto it = pathsets_.find(pair);
    if (it == pathsets_.end() || it->second.empty())
      throw Error("no pathset for arrival pair " + topo_.pair_name(pair));
    return it->second;
  }

  void admit(const FlowArrival& a) {
    if (!(a.size > 0.0)) throw Error("flow with non-positive size");
    const auto& ps = pathset_for(a.pair);
    const auto d = policy_.decide(view_, a.pair, ps, a.size, policy_rng_);
    const Path& path = ps.paths[d.path_index];

    if (config_.log_decisions) {
      DecisionRecord rec{a.flow_id, policy_.name(), d.branch, d.path_index, std::nullopt};
      if (d.branch == Branch::Mbp) rec.max_backlog = path_backlog(view_, path);
      result_.decisions.push_back(std::move(rec));
    }

    view_.on_allocation(path, a.size);
    FlowRecord rec;
    rec.flow_id = a.flow_id;
    rec.pair = a.pair;
    rec.size = a.size;
    rec.arrival = a.arrival_time;
    rec.path_index = d.path_index;
    rec.branch = d.branch;
    result_.flows.push_back(rec);

    const auto slot = acquire_slot();
    slots_[slot] = Active{result_.flows.size() - 1, &path, a.size, 0.0, slots_[slot].version + 1};
    active_.push_back(slot);
  }

  void complete(std::size_t slot) {
    auto& f = slots_[slot];
    auto& rec = result_.flows[f.record];
    if (f.remaining > 0.0) view_.on_progress(*f.path, f.remaining);
    f.remaining = 0.0;
    view_.on_completion(*f.path);
    rec.completion = now_;
    rec.response = response_time(rec, topo_, *f.path);
    ++f.version;
    active_.erase(std::find(active_.begin(), active_.end(), slot));
    in_use_[slot] = 0;
    free_.push_back(slot);
  }

  // Moves every active flow forward to time t at its current rate.
  void advance(double t) {
    if (t < now_) throw Error("event time went backwards");
    const double dt = t - now_;
    if (dt > 0.0) {
      for (const auto s : active_) {
        auto& f = slots_[s];
        const double bytes = f.rate * dt;
        const double moved = std::min(bytes, f.remaining);
        result_.flows[f.record].delivered += bytes;
        f.remaining = std::max(0.0, f.remaining - bytes);
        view_.on_progress(*f.path, moved);
      }
      for (std::size_t l = 0; l < link_rate_.size(); ++l) {
        if (view_.mode() == ControllerView::Mode::CounterEstimate)
          view_.on_drain(LinkId{static_cast<std::uint32_t>(l)}, link_rate_[l], dt);
        busy_[l] += link_rate_[l] * overlap(now_, t);
      }
    }
    now_ = t;
  }

  double overlap(double a, double b) const {
    const double lo = std::max(a, config_.measure_from);
    const double hi = config_.measure_to < 0.0 ? b : std::min(b, config_.measure_to);
    return std::max(0.0, hi - lo);
  }

  void recompute() {
    std::fill(link_rate_.begin(), link_rate_.end(), 0.0);
    if (active_.empty()) return;
    paths_scratch_.clear();
    for (const auto s : active_) paths_scratch_.push_back(slots_[s].path);
    const auto rates = compute_fair_rates(topo_, paths_scratch_);

    for (std::size_t i = 0; i < active_.size(); ++i) {
      auto& f = slots_[active_[i]];
      for (const auto lid : f.path->links) link_rate_[lid.value] += rates[i];
      if (rates[i] == f.rate && f.version != 0 && scheduled_[active_[i]]) continue;
      f.rate = rates[i];
      ++f.version;
      scheduled_[active_[i]] = 1;
      queue_.push(Completion{now_ + f.remaining / f.rate, result_.flows[f.record].flow_id,
                             active_[i], f.version});
    }
    for (const auto& l : topo_.links())
      peak_[l.id.value] = std::max(peak_[l.id.value], link_rate_[l.id.value] / l.capacity);

    if (config_.check_invariants) verify(rates);
    if (queue_.size() > 4 * active_.size() + 64) compact();
  }

  void verify(std::span<const double> rates) {
    auto& inv = result_.invariants;
    ++inv.recomputations;
    const auto chk = check_fair_rates(topo_, paths_scratch_, rates);
    inv.capacity_violations += chk.capacity_violations;
    inv.bottleneck_violations += chk.bottleneck_violations;
    inv.max_relative_excess = std::max(inv.max_relative_excess, chk.max_relative_excess);
    if (view_.mode() != ControllerView::Mode::Exact) return;
    std::vector<double> scratch(topo_.link_count(), 0.0);
    for (const auto s : active_)
      for (const auto lid : slots_[s].path->links)
        scratch[lid.value] += slots_[s].remaining / topo_.link(lid).capacity;
    for (std::size_t l = 0; l < scratch.size(); ++l)
      inv.max_view_error =
          std::max(inv.max_view_error,
                   std::abs(scratch[l] - view_.backlog(LinkId{static_cast<std::uint32_t>(l)})));
  }

  void notify() {
    if (!observer_) return;
    std::vector<ActiveFlowView> snapshot;
    snapshot.reserve(active_.size());
    for (const auto s : active_) {
      const auto& f = slots_[s];
      snapshot.push_back({&result_.flows[f.record], f.path, f.remaining, f.rate});
    }
    observer_(now_, snapshot, view_);
  }

  void drop_stale() {
    while (!queue_.empty()) {
      const auto& top = queue_.top();
      if (top.version == slots_[top.slot].version && is_active(top.slot)) return;
      queue_.pop();
    }
  }

  bool is_active(std::size_t slot) const { return in_use_[slot] != 0; }

  void compact() {
    std::vector<Completion> keep;
    while (!queue_.empty()) {
      const auto c = queue_.top();
      queue_.pop();
      if (c.version == slots_[c.slot].version && is_active(c.slot)) keep.push_back(c);
    }
    for (const auto& c : keep) queue_.push(c);
  }

  std::size_t acquire_slot() {
    if (!free_.empty()) {
      const auto s = free_.back();
      free_.pop_back();
      in_use_[s] = 1;
      scheduled_[s] = 0;
      return s;
    }
    slots_.push_back(Active{});
    in_use_.push_back(1);
    scheduled_.push_back(0);
    return slots_.size() - 1;
  }

  void finalize_link_stats() {
    const double from = config_.measure_from;
    const double to = config_.measure_to < 0.0 ? now_ : config_.measure_to;
    const double span = to - from;
    result_.links.resize(topo_.link_count());
    for (const auto& l : topo_.links()) {
      auto& s = result_.links[l.id.value];
      s.peak_utilization = peak_[l.id.value];
      s.mean_utilization = span > 0.0 ? busy_[l.id.value] / (l.capacity * span) : 0.0;
    }
  }

  const Topology& topo_;
  const PathSetMap& pathsets_;
  const Policy& policy_;
  EngineConfig config_;
  ControllerView view_;
  Rng policy_rng_;
  EngineObserver observer_;

  RunResult result_;
  double now_ = 0.0;
  std::vector<Active> slots_;
  std::vector<char> in_use_;
  std::vector<char> scheduled_;
  std::vector<std::size_t> free_;
  std::vector<std::size_t> active_;
  std::priority_queue<Completion, std::vector<Completion>, Later> queue_;
  std::vector<const Path*> paths_scratch_;
  std::vector<double> busy_;
  std::vector<double> peak_;
  std::vector<double> link_rate_;
};

// Runs one simulation to drain.
inline RunResult run(std::span<const FlowArrival> arrivals, const Topology& topo,
                     const PathSetMap& pathsets, const Policy& policy, EngineConfig config = {}) {
  Engine engine(topo, pathsets, policy, config);
  return engine.run(arrivals);
}

}  // namespace icnte
