// Acceptance checks. Prints one PASS/FAIL line per criterion; with numeric
// arguments only those criteria run. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "icnte/icnte.hpp"
#include "oracles.hpp"

namespace {

using namespace icnte;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int sig = 4) { return text::format_double(v, sig); }

Scenario shipped_abilene() {
  const auto topo = build_abilene();
  auto dm = parse_traffic_matrix(read_file(std::string(ICNTE_DATA_DIR) + "/abilene_tm.csv"), topo);
  return Scenario{topo, std::move(dm)};
}

Outcome lp_correctness() {
  Stopwatch clock;
  Rng rng(20040515);
  const int instances = 100;
  int beaten = 0;
  double worst_recompute = 0.0;
  for (int i = 0; i < instances; ++i) {
    const auto inst = oracle::random_lp_instance(rng, 5, 3, 3);
    const auto r = compute_min_mlu_weights(inst.topo, inst.demands, inst.pathsets);
    const auto u = oracle::utilizations(inst, r.weights);
    for (std::size_t l = 0; l < u.size(); ++l)
      worst_recompute = std::max(worst_recompute, std::abs(u[l] - r.utilizations[l]));
    if (oracle::grid_point_below(inst.grid, inst.capacity, r.mlu - 0.01, 100)) ++beaten;
  }
  const double secs = clock.seconds();
  return {beaten == 0 && worst_recompute <= 1e-9 && secs < 60.0,
          std::to_string(instances) + " instances, grid beat LP by >0.01 in " +
              std::to_string(beaten) + ", max utilization recompute error " +
              fmt(worst_recompute, 3) + ", " + fmt(secs, 3) + " s"};
}

Outcome scale_linearity() {
  const auto s = shipped_abilene();
  const auto pairs = s.demands.pairs();
  const auto ps = build_pathsets(s.topology, pairs, 3);
  const double base = compute_min_mlu_weights(s.topology, s.demands, ps).mlu;
  double worst = 0.0;
  std::string ts;
  for (const double f : {1.0, 1.2, 1.4, 1.6}) {
    const double t = compute_min_mlu_weights(s.topology, scale_demands(s.demands, f), ps).mlu;
    worst = std::max(worst, std::abs(t - f * base));
    ts += (ts.empty() ? "" : " ") + fmt(t);
  }
  return {worst <= 1e-6, "t = " + ts + ", max deviation " + fmt(worst, 3)};
}

Outcome yen_oracle() {
  std::vector<Topology> corpus{motivating_topology(),
                               parse_topology(read_file(std::string(ICNTE_DATA_DIR) +
                                                        "/motivating_topology.csv"))};
  Rng rng(8);
  for (int i = 0; i < 300; ++i)
    corpus.push_back(oracle::random_graph(rng, 2 + rng.next_u64() % 7, 0.2 + 0.6 * rng.uniform()));
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  for (const auto& t : corpus) {
    if (t.node_count() > 8) continue;
    for (std::uint32_t s = 0; s < t.node_count(); ++s)
      for (std::uint32_t d = 0; d < t.node_count(); ++d) {
        if (s == d) continue;
        const auto all = oracle::all_simple_paths(t, NodeId{s}, NodeId{d});
        for (const std::size_t k : {1u, 2u, 3u, 4u, 6u}) {
          const auto ps = yen_k_shortest(t, NodeId{s}, NodeId{d}, k);
          bool same = ps.size() == std::min(k, all.size());
          for (std::size_t i = 0; same && i < ps.size(); ++i)
            same = ps.paths[i].nodes == all[i].nodes && ps.paths[i].total_weight == all[i].weight;
          ++cases;
          mismatches += !same;
        }
      }
  }
  return {mismatches == 0 && cases > 0, std::to_string(corpus.size()) + " graphs, " +
                                            std::to_string(cases) + " queries, " +
                                            std::to_string(mismatches) + " mismatches"};
}

Outcome engine_certificate() {
  Stopwatch clock;
  const auto topo = build_abilene();
  const auto dm = scale_demands(builtin_abilene_matrix(topo), 1.3);
  const auto pairs = dm.pairs();
  const auto ps = build_pathsets(topo, pairs, 3);
  const auto arrivals = generate_arrivals(dm, SizeDistribution::pareto_with_mean(3 * kMB), 4.5, 4242);
  EngineConfig ec;
  ec.check_invariants = true;
  ec.policy_seed = 4242;
  Engine engine(topo, ps, Policy::mbp(), ec);
  std::size_t busy_events = 0;
  engine.set_observer([&](double, std::span<const ActiveFlowView> active, const ControllerView&) {
    busy_events += !active.empty();
  });
  const auto r = engine.run(arrivals);
  double worst_bytes = 0.0;
  std::size_t incomplete = 0;
  for (const auto& f : r.flows) {
    if (!f.completion) ++incomplete;
    worst_bytes = std::max(worst_bytes, std::abs(f.delivered - f.size) / f.size);
  }
  const auto& inv = r.invariants;
  const double secs = clock.seconds();
  const bool ok = arrivals.size() >= 10'000 && inv.recomputations == busy_events &&
                  inv.capacity_violations == 0 && inv.bottleneck_violations == 0 &&
                  inv.max_relative_excess <= 1e-9 && worst_bytes <= 1e-6 && incomplete == 0 &&
                  secs < 120.0;
  return {ok, std::to_string(arrivals.size()) + " flows, " + std::to_string(inv.recomputations) +
                  " recomputations, capacity/bottleneck violations " +
                  std::to_string(inv.capacity_violations) + "/" +
                  std::to_string(inv.bottleneck_violations) + ", max excess " +
                  fmt(inv.max_relative_excess, 3) + ", max byte error " + fmt(worst_bytes, 3) +
                  ", " + fmt(secs, 3) + " s"};
}

Outcome motivating() {
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<double> wr_sum(3, 0.0), mbp_sum(3, 0.0);
  int in_band = 0;
  std::string gains;
  for (const auto seed : seeds) {
    const auto r = run_motivating_example(seed);
    for (const auto& c : r.checkpoints) {
      const auto idx = c.delivered == 200 ? 0 : c.delivered == 400 ? 1 : 2;
      (c.policy == "wr" ? wr_sum : mbp_sum)[idx] += c.mean_response;
    }
    const double g = r.gains.front().gain;
    in_band += g >= 0.15 && g <= 0.45;
    gains += (gains.empty() ? "" : " ") + fmt(g, 3);
  }
  bool beats = true;
  std::string cps;
  for (std::size_t i = 0; i < 3; ++i) {
    beats = beats && mbp_sum[i] < wr_sum[i];
    cps += (cps.empty() ? "" : " ") + fmt(reduction_gain(wr_sum[i], mbp_sum[i]), 3);
  }
  return {beats && in_band >= 4, "gain per seed " + gains + "; " + std::to_string(in_band) +
                                     "/5 in [0.15,0.45]; seed-averaged gain at 200/400/800 " + cps};
}

Outcome abilene_trend() {
  Stopwatch clock;
  ExperimentConfig c;  // shipped defaults: scales 1.0..1.6, Pareto mean 3 MB, 5 replications
  const auto r = run_comparison(c, shipped_abilene());
  bool floor_ok = r.gains.size() == c.scales.size();
  std::string gs;
  for (const auto& g : r.gains) {
    floor_ok = floor_ok && g.gain >= 0.15;
    gs += (gs.empty() ? "" : " ") + fmt(g.scale, 2) + ":" + fmt(g.gain, 3);
  }
  const bool rising = !r.gains.empty() && r.gains.back().gain >= r.gains.front().gain;
  std::size_t flows_lo = ~std::size_t{0}, flows_hi = 0;
  for (const auto& s : r.summary) {
    flows_lo = std::min(flows_lo, s.flows);
    flows_hi = std::max(flows_hi, s.flows);
  }
  const double per_scale = clock.seconds() / static_cast<double>(c.scales.size());
  return {floor_ok && rising && per_scale < 600.0,
          "gains " + gs + "; floor 0.15 " + (floor_ok ? "met" : "missed") + ", trend " +
              (rising ? "non-decreasing" : "decreasing") + "; " + std::to_string(flows_lo) + "-" +
              std::to_string(flows_hi) + " measured flows per run, " + fmt(per_scale, 3) +
              " s per scale"};
}

Outcome threshold_sweep() {
  ExperimentConfig c;
  const auto dist = c.distribution();
  const double p80 = dist.quantile(0.8);
  c.thresholds.push_back(p80);
  std::sort(c.thresholds.begin(), c.thresholds.end());
  const auto s = shipped_abilene();
  const auto r = run_threshold_sweep(c, s);
  const double t = r.scales.front().lp_mlu;

  bool gains_mono = true, freq_mono = true;
  for (std::size_t i = 1; i < r.allocations.size(); ++i) {
    gains_mono = gains_mono && r.allocations[i].gain <= r.allocations[i - 1].gain;
    freq_mono = freq_mono && r.allocations[i].allocation_frequency <=
                                 r.allocations[i - 1].allocation_frequency;
  }
  const auto full = std::find_if(r.allocations.begin(), r.allocations.end(),
                                 [](const AllocationRow& a) { return a.threshold == 0.0; });
  const auto at80 = std::find_if(r.allocations.begin(), r.allocations.end(),
                                 [&](const AllocationRow& a) { return a.threshold == p80; });
  const bool freq_ok = std::abs(at80->allocation_frequency - 0.20) <= 0.05;
  const bool retains = full->gain > 0.0 && at80->gain >= 0.5 * full->gain;
  std::string rows;
  for (const auto& a : r.allocations)
    rows += (rows.empty() ? "" : " ") + fmt(a.threshold, 4) + ":" + fmt(a.gain, 3) + "/" +
            fmt(a.allocation_frequency, 3);
  return {std::abs(t - 0.78) < 0.01 && gains_mono && freq_mono && freq_ok && retains,
          "lp t " + fmt(t) + "; threshold:gain/frequency " + rows + "; gains " +
              (gains_mono ? "" : "not ") + "non-increasing, frequency " +
              (freq_mono ? "" : "not ") + "non-increasing, p80 " + fmt(p80, 4) +
              " frequency " + fmt(at80->allocation_frequency, 3) + ", retains " +
              fmt(full->gain != 0.0 ? at80->gain / full->gain : 0.0, 3) + " of full gain"};
}

Outcome determinism() {
  ExperimentConfig c;
  c.scales = {1.3};
  c.horizon = 4.0;
  c.reps = 2;
  c.thresholds = {0.0, 2.5 * kMB, kInfinity};
  const auto s = shipped_abilene();
  const auto base = fs::temp_directory_path() / "icnte_acceptance_determinism";
  fs::remove_all(base);
  std::size_t compared = 0, differing = 0;
  const auto compare = [&](const std::function<ComparisonReport()>& make, const std::string& tag) {
    const auto a = emit_report(make(), base / (tag + "_a"));
    const auto b = emit_report(make(), base / (tag + "_b"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++compared;
      differing += read_file(a[i].string()) != read_file(b[i].string());
    }
  };
  compare([&] { return run_comparison(c, s); }, "run");
  compare([&] { return run_threshold_sweep(c, s); }, "sweep");
  compare([&] { return run_motivating_example(7); }, "motivating");
  fs::remove_all(base);
  return {differing == 0 && compared > 0,
          std::to_string(compared) + " file pairs compared, " + std::to_string(differing) + " differ"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "min-MLU LP matches grid search", lp_correctness},
      {2, "LP optimum scales linearly with demand", scale_linearity},
      {3, "k-shortest paths match exhaustive enumeration", yen_oracle},
      {4, "max-min engine certificate on a 10^4-flow run", engine_certificate},
      {5, "three-node example: MBP beats Weighted Random", motivating},
      {6, "Abilene: MBP gain >= 0.15 and rising with load", abilene_trend},
      {7, "threshold sweep at LP t ~ 0.78", threshold_sweep},
      {8, "identical config and seed give identical CSV", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
