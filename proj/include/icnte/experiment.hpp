#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "icnte/common.hpp"
#include "icnte/engine.hpp"
#include "icnte/kpaths.hpp"
#include "icnte/minmlu.hpp"
#include "icnte/policies.hpp"
#include "icnte/rng.hpp"
#include "icnte/topology.hpp"
#include "icnte/traffic.hpp"

namespace icnte {

// LP optimum of the shipped synthetic Abilene matrix at scale 1.
inline constexpr double kAbileneTargetMlu = 0.603;

struct ExperimentConfig {
  std::string topology = "abilene";  // "abilene" or a topology file path
  std::string traffic;               // traffic matrix path; empty = built-in synthetic matrix
  std::string dist = "pareto";       // pareto | bimodal | deterministic
  double mean_size = 3 * kMB;
  double pareto_shape = 1.5;
  double bimodal_small = 10 * kKB;
  double bimodal_large = 10 * kMB;
  std::size_t k = 3;
  std::vector<std::string> policies = {"wr", "mbp"};
  std::vector<double> scales = {1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6};
  std::vector<double> thresholds = {0.0,     10 * kKB, 100 * kKB, 1 * kMB,  2.5 * kMB,
                                    5 * kMB, 10 * kMB, kInfinity};
  double sweep_scale = 1.3;
  double horizon = 20.0;                 // seconds
  std::optional<double> warmup;          // default: 10% of horizon
  std::uint64_t seed = 1;
  std::size_t reps = 5;
  std::string view = "exact";            // exact | counter
  std::string out = "results";

  double warmup_seconds() const { return warmup ? *warmup : 0.1 * horizon; }

  ControllerView::Mode view_mode() const {
    if (view == "exact") return ControllerView::Mode::Exact;
    if (view == "counter") return ControllerView::Mode::CounterEstimate;
    throw Error("unknown view mode '" + view + "' (expected exact|counter)");
  }

  SizeDistribution distribution() const {
    if (dist == "pareto") return SizeDistribution::pareto_with_mean(mean_size, pareto_shape);
    if (dist == "bimodal")
      return SizeDistribution::bimodal_with_mean(mean_size, bimodal_small, bimodal_large);
    if (dist == "deterministic") return SizeDistribution::deterministic(mean_size);
    throw Error("unknown distribution '" + dist + "' (expected pareto|bimodal|deterministic)");
  }

  void validate() const {
    if (scales.empty()) throw Error("no scale factors");
    for (const double s : scales)
      if (!(s > 0.0)) throw Error("scale factors must be positive");
    if (!(sweep_scale > 0.0)) throw Error("sweep scale must be positive");
    for (const double t : thresholds)
      if (!(t >= 0.0)) throw Error("thresholds must be non-negative");
    if (reps < 1) throw Error("replication count must be at least 1");
    if (k < 1) throw Error("k must be at least 1");
    if (!(horizon > 0.0)) throw Error("horizon must be positive");
    if (!(warmup_seconds() >= 0.0 && warmup_seconds() < horizon))
      throw Error("warm-up must lie in [0, horizon)");
    if (!(mean_size > 0.0)) throw Error("mean size must be positive");
    for (const auto& p : policies)
      if (p != "wr" && p != "mbp") throw Error("unknown policy '" + p + "' (expected wr|mbp)");
    view_mode();
    distribution();
  }
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += text::format_double(v[i]);
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view s, std::string_view key) {
  std::vector<double> out;
  for (const auto item : text::split(s, ',')) {
    const auto v = text::parse_double(item);
    if (!v) throw Error("bad value '" + std::string(item) + "' for " + std::string(key));
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

// Applies one key=value setting. Keys match the CLI long flags.
inline void apply_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
  const auto num = [&]() {
    const auto v = text::parse_double(value);
    if (!v) throw Error("bad number '" + std::string(value) + "' for " + std::string(key));
    return *v;
  };
  const auto count = [&]() {
    const auto v = text::parse_int(value);
    if (!v || *v < 0) throw Error("bad integer '" + std::string(value) + "' for " + std::string(key));
    return static_cast<std::uint64_t>(*v);
  };
  if (key == "topology") c.topology = value;
  else if (key == "traffic") c.traffic = value;
  else if (key == "dist") c.dist = value;
  else if (key == "mean-size") c.mean_size = num();
  else if (key == "pareto-shape") c.pareto_shape = num();
  else if (key == "bimodal-small") c.bimodal_small = num();
  else if (key == "bimodal-large") c.bimodal_large = num();
  else if (key == "k") c.k = count();
  else if (key == "scale") c.scales = detail::parse_double_list(value, key);
  else if (key == "threshold") c.thresholds = detail::parse_double_list(value, key);
  else if (key == "sweep-scale") c.sweep_scale = num();
  else if (key == "horizon") c.horizon = num();
  else if (key == "warmup") c.warmup = num();
  else if (key == "seed") c.seed = count();
  else if (key == "reps") c.reps = count();
  else if (key == "view") c.view = value;
  else if (key == "out") c.out = value;
  else if (key == "policies") {
    c.policies.clear();
    for (const auto p : text::split(value, ',')) c.policies.emplace_back(p);
  } else {
    throw Error("unknown config key '" + std::string(key) + "'");
  }
}

// Key-value config file: "key = value" per line, '#' comments.
inline ExperimentConfig parse_config(std::string_view content, ExperimentConfig base = {}) {
  std::size_t line_no = 0;
  for (const auto raw : text::lines(content)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    try {
      apply_config_value(base, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return base;
}

inline std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  const auto kv = [&](std::string_view k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  kv("topology", c.topology);
  kv("traffic", c.traffic);
  kv("dist", c.dist);
  kv("mean-size", text::format_double(c.mean_size));
  kv("pareto-shape", text::format_double(c.pareto_shape));
  kv("bimodal-small", text::format_double(c.bimodal_small));
  kv("bimodal-large", text::format_double(c.bimodal_large));
  kv("k", std::to_string(c.k));
  std::string policies;
  for (std::size_t i = 0; i < c.policies.size(); ++i) policies += (i ? "," : "") + c.policies[i];
  kv("policies", policies);
  kv("scale", detail::join_doubles(c.scales));
  kv("threshold", detail::join_doubles(c.thresholds));
  kv("sweep-scale", text::format_double(c.sweep_scale));
  kv("horizon", text::format_double(c.horizon));
  kv("warmup", text::format_double(c.warmup_seconds()));
  kv("seed", std::to_string(c.seed));
  kv("reps", std::to_string(c.reps));
  kv("view", c.view);
  kv("out", c.out);
  return out;
}

struct SummaryRow {
  double scale = 1.0;
  std::string policy;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::size_t flows = 0;          // flows in the measurement window
  double mean_response = 0.0;     // seconds
  double peak_mlu = 0.0;          // max over links of the window-mean utilization
  std::size_t mbp_allocations = 0;
  std::uint64_t stream_hash = 0;
};

struct GainRow {
  double scale = 1.0;
  double gain = 0.0;
};

struct AllocationRow {
  double threshold = 0.0;
  double gain = 0.0;
  double allocation_frequency = 0.0;
};

struct ScaleRow {
  double scale = 1.0;
  double lp_mlu = 0.0;
  bool feasible = true;
};

struct CheckpointRow {
  std::string policy;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::size_t delivered = 0;
  double mean_response = 0.0;
};

struct ComparisonReport {
  std::vector<SummaryRow> summary;
  std::vector<GainRow> gains;
  std::vector<AllocationRow> allocations;
  std::vector<ScaleRow> scales;
  std::vector<CheckpointRow> checkpoints;
  std::optional<ExperimentConfig> config;
};

// Mean of the per-replication means of `policy` at `scale`, summed in
// replication order.
inline std::optional<double> policy_mean(const ComparisonReport& r, double scale,
                                         std::string_view policy) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : r.summary) {
    if (row.scale == scale && row.policy == policy) {
      sum += row.mean_response;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// (RT_wr - RT_x) / RT_wr.
inline double reduction_gain(double baseline, double candidate) {
  return (baseline - candidate) / baseline;
}

// Deterministic seed of replication `rep`.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
  return derive_seed(master, fnv1a("replication"), rep);
}

struct Scenario {
  Topology topology;
  DemandMatrix demands;
};

// Gravity-model matrix over every ordered pair, rescaled so that the min-MLU
// optimum with k paths equals `target_mlu`. Rates are rounded to 1 kbps.
inline DemandMatrix synthesize_gravity_matrix(const Topology& topo, std::uint64_t seed,
                                              double target_mlu, std::size_t k,
                                              double mean_size = 3 * kMB) {
  Rng rng(derive_seed(seed, "gravity"));
  std::vector<double> mass(topo.node_count());
  for (auto& m : mass) m = 0.25 + rng.uniform();
  DemandMatrix dm;
  for (std::uint32_t s = 0; s < topo.node_count(); ++s)
    for (std::uint32_t d = 0; d < topo.node_count(); ++d)
      if (s != d) dm.set_load({NodeId{s}, NodeId{d}}, mass[s] * mass[d] * 1e8, mean_size);

  const auto pairs = dm.pairs();
  const auto ps = build_pathsets(topo, pairs, k);
  const double t = compute_min_mlu_weights(topo, dm, ps).mlu;
  DemandMatrix out;
  for (const auto& [pair, d] : dm.entries()) {
    const double mbps = bytes_per_second_to_mbps(d.offered_load() * target_mlu / t);
    out.set_load(pair, mbps_to_bytes_per_second(std::round(mbps * 1000.0) / 1000.0), mean_size);
  }
  return out;
}

inline DemandMatrix builtin_abilene_matrix(const Topology& abilene, double mean_size = 3 * kMB) {
  return synthesize_gravity_matrix(abilene, 2004, kAbileneTargetMlu, 3, mean_size);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const ExperimentConfig& c) {
  Scenario s;
  s.topology = c.topology == "abilene" ? build_abilene() : parse_topology(read_file(c.topology));
  if (!c.traffic.empty()) {
    s.demands = parse_traffic_matrix(read_file(c.traffic), s.topology, c.mean_size);
  } else if (c.topology == "abilene") {
    s.demands = builtin_abilene_matrix(s.topology, c.mean_size);
  } else {
    throw Error("--traffic is required for a custom topology");
  }
  return s;
}

namespace detail {

struct RunSummary {
  std::size_t flows = 0;
  double mean_response = 0.0;
  double peak_mlu = 0.0;
  std::size_t mbp_allocations = 0;
};

inline RunSummary summarize(const RunResult& r, double warmup) {
  RunSummary s;
  double total = 0.0;
  for (const auto& f : r.flows) {
    if (f.arrival < warmup) continue;
    if (!f.completion) throw Error("flow did not complete");
    total += f.response;
    ++s.flows;
    if (f.branch == Branch::Mbp) ++s.mbp_allocations;
  }
  s.mean_response = s.flows ? total / static_cast<double>(s.flows) : 0.0;
  for (const auto& l : r.links) s.peak_mlu = std::max(s.peak_mlu, l.mean_utilization);
  return s;
}

inline Policy make_policy(std::string_view name, const WeightAssignment& w) {
  if (name == "mbp") return Policy::mbp();
  if (name == "wr") return Policy::weighted_random(w);
  throw Error("unknown policy '" + std::string(name) + "'");
}

}  // namespace detail

// Runs every policy on identical arrival streams for each scale and
// replication, and derives the MBP-vs-WR gain per scale.
inline ComparisonReport run_comparison(const ExperimentConfig& config, const Scenario& scenario) {
  config.validate();
  ComparisonReport report;
  report.config = config;
  const auto& topo = scenario.topology;
  const auto dist = config.distribution();
  const auto pairs = scenario.demands.pairs();
  const auto pathsets = build_pathsets(topo, pairs, config.k);
  const double warmup = config.warmup_seconds();

  EngineConfig ec;
  ec.view_mode = config.view_mode();
  ec.measure_from = warmup;
  ec.measure_to = config.horizon;

  for (const double scale : config.scales) {
    const auto dm = scale_demands(scenario.demands, scale);
    const auto lp = compute_min_mlu_weights(topo, dm, pathsets);
    report.scales.push_back({scale, lp.mlu, lp.feasible});
    if (!lp.feasible) continue;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
      const auto seed = replication_seed(config.seed, rep);
      const auto arrivals = generate_arrivals(dm, dist, config.horizon, seed);
      const auto hash = stream_hash(arrivals);
      for (const auto& name : config.policies) {
        const auto policy = detail::make_policy(name, lp.weights);
        ec.policy_seed = seed;
        const auto s = detail::summarize(run(arrivals, topo, pathsets, policy, ec), warmup);
        report.summary.push_back({scale, name, rep, seed, s.flows, s.mean_response, s.peak_mlu,
                                  s.mbp_allocations, hash});
      }
    }
    const auto wr = policy_mean(report, scale, "wr");
    const auto mbp = policy_mean(report, scale, "mbp");
    if (wr && mbp) report.gains.push_back({scale, reduction_gain(*wr, *mbp)});
  }
  return report;
}

// Thresholded MBP at config.sweep_scale for every threshold, against the
// Weighted Random baseline on the same streams.
inline ComparisonReport run_threshold_sweep(const ExperimentConfig& config,
                                            const Scenario& scenario) {
  config.validate();
  ComparisonReport report;
  report.config = config;
  const auto& topo = scenario.topology;
  const auto dist = config.distribution();
  const auto pathsets = build_pathsets(topo, scenario.demands.pairs(), config.k);
  const double warmup = config.warmup_seconds();
  const double scale = config.sweep_scale;
  const auto dm = scale_demands(scenario.demands, scale);
  const auto lp = compute_min_mlu_weights(topo, dm, pathsets);
  report.scales.push_back({scale, lp.mlu, lp.feasible});
  if (!lp.feasible) return report;

  EngineConfig ec;
  ec.view_mode = config.view_mode();
  ec.measure_from = warmup;
  ec.measure_to = config.horizon;

  std::vector<Policy> policies{Policy::weighted_random(lp.weights)};
  for (const double th : config.thresholds) policies.push_back(Policy::thresholded(th, lp.weights));

  std::map<std::string, std::pair<std::size_t, std::size_t>> allocations;  // mbp, total
  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    const auto seed = replication_seed(config.seed, rep);
    const auto arrivals = generate_arrivals(dm, dist, config.horizon, seed);
    const auto hash = stream_hash(arrivals);
    for (const auto& policy : policies) {
      ec.policy_seed = seed;
      const auto s = detail::summarize(run(arrivals, topo, pathsets, policy, ec), warmup);
      report.summary.push_back({scale, policy.name(), rep, seed, s.flows, s.mean_response,
                                s.peak_mlu, s.mbp_allocations, hash});
      auto& a = allocations[policy.name()];
      a.first += s.mbp_allocations;
      a.second += s.flows;
    }
  }
  const auto wr = policy_mean(report, scale, "wr");
  for (std::size_t i = 1; i < policies.size(); ++i) {
    const auto name = policies[i].name();
    const auto mean = policy_mean(report, scale, name);
    const auto& a = allocations[name];
    report.allocations.push_back(
        {config.thresholds[i - 1], reduction_gain(*wr, *mean),
         a.second ? static_cast<double>(a.first) / static_cast<double>(a.second) : 0.0});
  }
  return report;
}

// Three-node network: links 1->2, 2->3, 1->3 of one unit (1 MB/s) each.
inline Topology motivating_topology(double latency = 0.0) {
  const double unit = 1 * kMB;
  return Topology::from_links({{"1", "2", unit, latency, 1.0},
                               {"2", "3", unit, latency, 1.0},
                               {"1", "3", unit, latency, 1.0}});
}

struct MotivatingOptions {
  std::size_t contents = 800;
  std::vector<std::size_t> checkpoints = {200, 400, 800};
  double intensity = 0.5;  // each demand as a fraction of link capacity
  SizeDistribution dist = SizeDistribution::pareto_with_mean(1 * kMB);
};

// Node 2->3 and 1->3 demands of equal intensity. Contents from 1 to 3 are
// placed by MBP or by the fixed 1/3 (via node 2) : 2/3 (direct) split; both
// policies see the same arrivals. Reports the mean response time of the
// first 200, 400 and 800 delivered 1->3 contents.
inline ComparisonReport run_motivating_example(std::uint64_t seed,
                                               const MotivatingOptions& opt = {}) {
  const auto topo = motivating_topology();
  const NodePair via{topo.node("1"), topo.node("3")};
  const NodePair bg{topo.node("2"), topo.node("3")};
  DemandMatrix dm;
  const double load = opt.intensity * 1 * kMB;
  dm.set_load(via, load, opt.dist.mean());
  dm.set_load(bg, load, opt.dist.mean());
  const std::vector<NodePair> pairs{via, bg};
  const auto pathsets = build_pathsets(topo, pairs, 3);

  // PathSet order is (direct, via node 2).
  WeightAssignment w;
  w.weights[via] = {2.0 / 3.0, 1.0 / 3.0};
  w.weights[bg] = {1.0};

  double horizon = 2.0 * static_cast<double>(opt.contents) * opt.dist.mean() / load;
  std::vector<FlowArrival> arrivals;
  for (;;) {
    arrivals = generate_arrivals(dm, opt.dist, horizon, seed);
    const auto n = std::count_if(arrivals.begin(), arrivals.end(),
                                 [&](const FlowArrival& a) { return a.pair == via; });
    if (static_cast<std::size_t>(n) >= opt.contents) break;
    horizon *= 2.0;
  }
  std::size_t seen = 0;
  std::size_t cut = arrivals.size();
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    if (arrivals[i].pair == via && ++seen == opt.contents) {
      cut = i + 1;
      break;
    }
  }
  arrivals.resize(cut);

  ComparisonReport report;
  const auto hash = stream_hash(arrivals);
  const std::vector<std::pair<std::string, Policy>> policies{
      {"wr", Policy::weighted_random(w)}, {"mbp", Policy::mbp()}};
  std::map<std::string, double> final_mean;
  for (const auto& [name, policy] : policies) {
    EngineConfig ec;
    ec.policy_seed = seed;
    const auto result = run(arrivals, topo, pathsets, policy, ec);
    std::vector<const FlowRecord*> delivered;
    for (const auto& f : result.flows)
      if (f.pair == via) delivered.push_back(&f);
    std::stable_sort(delivered.begin(), delivered.end(),
                     [](const FlowRecord* a, const FlowRecord* b) { return *a->completion < *b->completion; });
    for (const auto n : opt.checkpoints) {
      double total = 0.0;
      for (std::size_t i = 0; i < n && i < delivered.size(); ++i) total += delivered[i]->response;
      const auto count = std::min(n, delivered.size());
      const double mean = count ? total / static_cast<double>(count) : 0.0;
      report.checkpoints.push_back({name, 0, seed, n, mean});
      final_mean[name] = mean;
    }
    const auto s = detail::summarize(result, 0.0);
    report.summary.push_back(
        {1.0, name, 0, seed, s.flows, s.mean_response, s.peak_mlu, s.mbp_allocations, hash});
  }
  report.gains.push_back({1.0, reduction_gain(final_mean["wr"], final_mean["mbp"])});
  return report;
}

inline constexpr std::string_view kSummaryHeader =
    "scale,policy,replication,seed,flows,mean_response_s,peak_mlu";
inline constexpr std::string_view kGainsHeader = "scale,gain";
inline constexpr std::string_view kAllocationsHeader = "threshold_bytes,gain,allocation_frequency";
inline constexpr std::string_view kScalesHeader = "scale,lp_mlu,feasible";
inline constexpr std::string_view kCheckpointsHeader =
    "policy,replication,seed,delivered,mean_response_s";

inline std::string summary_csv(const ComparisonReport& r) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& row : r.summary) {
    out += text::format_double(row.scale) + ',' + row.policy + ',' +
           std::to_string(row.replication) + ',' + std::to_string(row.seed) + ',' +
           std::to_string(row.flows) + ',' + text::format_double(row.mean_response) + ',' +
           text::format_double(row.peak_mlu) + '\n';
  }
  return out;
}

inline std::string gains_csv(const ComparisonReport& r) {
  std::string out(kGainsHeader);
  out += '\n';
  for (const auto& g : r.gains)
    out += text::format_double(g.scale) + ',' + text::format_double(g.gain) + '\n';
  return out;
}

inline std::string allocations_csv(const ComparisonReport& r) {
  std::string out(kAllocationsHeader);
  out += '\n';
  for (const auto& a : r.allocations)
    out += text::format_double(a.threshold) + ',' + text::format_double(a.gain) + ',' +
           text::format_double(a.allocation_frequency) + '\n';
  return out;
}

inline std::string scales_csv(const ComparisonReport& r) {
  std::string out(kScalesHeader);
  out += '\n';
  for (const auto& s : r.scales)
    out += text::format_double(s.scale) + ',' + text::format_double(s.lp_mlu) + ',' +
           (s.feasible ? "1" : "0") + '\n';
  return out;
}

inline std::string checkpoints_csv(const ComparisonReport& r) {
  std::string out(kCheckpointsHeader);
  out += '\n';
  for (const auto& c : r.checkpoints)
    out += c.policy + ',' + std::to_string(c.replication) + ',' + std::to_string(c.seed) + ',' +
           std::to_string(c.delivered) + ',' + text::format_double(c.mean_response) + '\n';
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

// Writes summary.csv, gains.csv, allocations.csv and config.txt, plus
// scales.csv and checkpoints.csv when the report has those rows.
inline std::vector<std::filesystem::path> emit_report(const ComparisonReport& r,
                                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error("cannot create output directory " + dir.string());
  std::vector<std::filesystem::path> written;
  const auto put = [&](const char* name, const std::string& content) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  };
  put("summary.csv", summary_csv(r));
  put("gains.csv", gains_csv(r));
  put("allocations.csv", allocations_csv(r));
  put("config.txt", r.config ? serialize_config(*r.config) : std::string());
  if (!r.scales.empty()) put("scales.csv", scales_csv(r));
  if (!r.checkpoints.empty()) put("checkpoints.csv", checkpoints_csv(r));
  return written;
}

}  // namespace icnte
