// Command-line driver: runs policy comparisons, threshold sweeps and the
// three-node example, and exports min-MLU weights and candidate paths.

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "icnte/icnte.hpp"

namespace {

using icnte::ExperimentConfig;

// Long flags that map one-to-one onto config keys.
const std::vector<std::pair<std::string, std::string>> kFlags = {
    {"topology", "'abilene' or a topology CSV path"},
    {"traffic", "traffic matrix CSV (default: built-in synthetic Abilene matrix)"},
    {"dist", "content size distribution: pareto|bimodal|deterministic"},
    {"mean-size", "mean content size in bytes"},
    {"pareto-shape", "Pareto shape parameter"},
    {"k", "candidate paths per pair"},
    {"scale", "comma-separated demand scale factors"},
    {"sweep-scale", "demand scale used by sweep-threshold"},
    {"threshold", "comma-separated size thresholds in bytes ('inf' allowed)"},
    {"horizon", "simulated seconds per run"},
    {"warmup", "seconds excluded from measurement"},
    {"seed", "master seed"},
    {"reps", "replications per cell"},
    {"policies", "comma-separated policies for run: wr,mbp"},
    {"view", "controller backlog view: exact|counter"},
    {"out", "output directory"},
};

void print_gains(const icnte::ComparisonReport& r) {
  for (const auto& s : r.scales) {
    std::printf("scale %-5s lp_mlu %.4f%s\n", icnte::text::format_double(s.scale).c_str(),
                s.lp_mlu, s.feasible ? "" : " (infeasible, skipped)");
  }
  for (const auto& g : r.gains)
    std::printf("scale %-5s gain %+.4f\n", icnte::text::format_double(g.scale).c_str(), g.gain);
}

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
}

int cmd_run(const ExperimentConfig& c) {
  const auto report = icnte::run_comparison(c, icnte::load_scenario(c));
  print_gains(report);
  print_written(icnte::emit_report(report, c.out));
  return 0;
}

int cmd_sweep(const ExperimentConfig& c) {
  const auto report = icnte::run_threshold_sweep(c, icnte::load_scenario(c));
  print_gains(report);
  for (const auto& a : report.allocations) {
    std::printf("threshold %-10s gain %+.4f allocation_frequency %.4f\n",
                icnte::text::format_double(a.threshold).c_str(), a.gain, a.allocation_frequency);
  }
  print_written(icnte::emit_report(report, c.out));
  return 0;
}

int cmd_motivating(const ExperimentConfig& c) {
  icnte::ComparisonReport all;
  all.config = c;
  icnte::MotivatingOptions opt;
  opt.dist = icnte::SizeDistribution::pareto_with_mean(1 * icnte::kMB, c.pareto_shape);
  for (std::size_t rep = 0; rep < c.reps; ++rep) {
    const auto seed = c.seed + rep;
    auto r = icnte::run_motivating_example(seed, opt);
    for (auto& row : r.checkpoints) {
      row.replication = rep;
      all.checkpoints.push_back(row);
    }
    for (auto& row : r.summary) {
      row.replication = rep;
      all.summary.push_back(row);
    }
    std::printf("seed %-4llu gain %+.4f\n", static_cast<unsigned long long>(seed),
                r.gains.front().gain);
  }
  print_written(icnte::emit_report(all, c.out));
  return 0;
}

int cmd_weights(const ExperimentConfig& c) {
  const auto s = icnte::load_scenario(c);
  const auto pathsets = icnte::build_pathsets(s.topology, s.demands.pairs(), c.k);
  const auto lp = icnte::compute_min_mlu_weights(
      s.topology, icnte::scale_demands(s.demands, c.scales.front()), pathsets);
  std::printf("# scale %s min-MLU %.6f%s\n", icnte::text::format_double(c.scales.front()).c_str(),
              lp.mlu, lp.feasible ? "" : " (exceeds 1)");
  std::fputs(icnte::serialize_weights(s.topology, lp.weights).c_str(), stdout);
  return 0;
}

int cmd_paths(const ExperimentConfig& c) {
  const auto s = icnte::load_scenario(c);
  const auto pathsets = icnte::build_pathsets(s.topology, s.demands.pairs(), c.k);
  std::fputs(icnte::format_pathsets(s.topology, pathsets).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-level comparison of backlog-aware and min-MLU path selection"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value file; flags override it")
      ->check(CLI::ExistingFile);
  std::vector<std::pair<std::string, std::string>> flag_values(kFlags.size());
  std::vector<CLI::Option*> flag_options;
  for (std::size_t i = 0; i < kFlags.size(); ++i) {
    flag_values[i].first = kFlags[i].first;
    flag_options.push_back(
        app.add_option("--" + kFlags[i].first, flag_values[i].second, kFlags[i].second));
  }

  auto* run = app.add_subcommand("run", "compare Weighted Random and MBP across scales");
  auto* sweep = app.add_subcommand("sweep-threshold", "thresholded MBP across size thresholds");
  auto* motivating = app.add_subcommand("motivating", "three-node example over seeds seed..seed+reps-1");
  auto* weights = app.add_subcommand("weights", "print min-MLU split weights at the first scale");
  auto* paths = app.add_subcommand("paths", "print the K shortest candidate paths per pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "icnte: %s\n", e.what());
    return 2;
  }

  try {
    ExperimentConfig config;
    if (!config_path.empty()) config = icnte::parse_config(icnte::read_file(config_path));
    for (std::size_t i = 0; i < kFlags.size(); ++i) {
      if (flag_options[i]->count() > 0)
        icnte::apply_config_value(config, flag_values[i].first, flag_values[i].second);
    }
    config.validate();
    if (run->parsed()) return cmd_run(config);
    if (sweep->parsed()) return cmd_sweep(config);
    if (motivating->parsed()) return cmd_motivating(config);
    if (weights->parsed()) return cmd_weights(config);
    if (paths->parsed()) return cmd_paths(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "icnte: %s\n", e.what());
    return 1;
  }
  return 1;
}
