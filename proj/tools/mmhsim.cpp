// Command-line driver: single episodes and scenario sweeps.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "mmh/config.hpp"
#include "mmh/metrics.hpp"
#include "mmh/scheduler.hpp"
#include "mmh/sweep.hpp"

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_trace_csv(const std::filesystem::path& dir, const mmh::Trace& trace) {
  {
    std::ofstream out(dir / "trace.csv");
    out << "slot,flow,node,q_bits,y\n";
    for (const auto& r : trace.queues)
      out << r.slot << "," << r.flow << "," << r.node << "," << fmt9(r.q_bits) << ","
          << fmt9(r.y) << "\n";
  }
  {
    std::ofstream out(dir / "alloc.csv");
    out << "slot,flow,from,to,power_w,rate_bits,slack_bits\n";
    for (const auto& r : trace.allocs)
      out << r.slot << "," << r.flow << "," << r.from << "," << r.to << "," << fmt9(r.power_w)
          << "," << fmt9(r.rate_bits) << "," << fmt9(r.slack_bits) << "\n";
  }
  {
    size_t max_paths = 0;
    for (const auto& r : trace.learner) max_paths = std::max(max_paths, r.pi.size());
    std::ofstream out(dir / "learner.csv");
    out << "window,slot,flow,l1_step";
    for (size_t i = 0; i < max_paths; ++i) out << ",pi_" << i;
    out << "\n";
    for (const auto& r : trace.learner) {
      out << r.window << "," << r.slot << "," << r.flow << "," << fmt9(r.l1_step);
      for (size_t i = 0; i < max_paths; ++i)
        out << "," << (i < r.pi.size() ? fmt9(r.pi[i]) : "");
      out << "\n";
    }
  }
  {
    std::ofstream out(dir / "sca_iters.csv");
    out << "slot,iterations,restored\n";
    for (const auto& r : trace.sca)
      out << r.slot << "," << r.iterations << "," << (r.restored ? 1 : 0) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop mmWave downlink scheduling simulator"};

  std::string config_path, sweep_path, out_dir = "out", report_path, scheme, emit_default;
  uint64_t seed = 1;
  long slots = 10000;
  double nu = 0.0, kappa = 0.0, arrival_gbps = 0.0, epsilon = 0.0;
  bool keep_trace = false;
  int jobs = int(std::thread::hardware_concurrency());

  app.add_option("--config", config_path, "Scenario config JSON (omit for the built-in scenario)");
  app.add_option("--scheme", scheme, "Proposed|Baseline1|Baseline2|Baseline3|SingleHop");
  app.add_option("--seed", seed, "Master RNG seed");
  app.add_option("--slots", slots, "Number of slots to simulate");
  app.add_option("--nu", nu, "Drift-penalty trade-off override");
  app.add_option("--kappa", kappa, "Learning temperature override");
  app.add_option("--arrival-gbps", arrival_gbps, "Mean arrival rate override, all flows");
  app.add_option("--epsilon", epsilon, "Delay-violation probability override");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--trace", keep_trace, "Write per-slot trace/alloc/learner/sca CSVs");
  app.add_option("--sweep", sweep_path, "Grid JSON: run a sweep instead of a single episode");
  app.add_option("--report", report_path, "Extra path for the sweep report JSON");
  app.add_option("--jobs", jobs, "Parallel sweep workers");
  app.add_option("--emit-default-config", emit_default,
                 "Write the built-in scenario config to PATH and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!emit_default.empty()) {
      std::ofstream(emit_default) << mmh::config_to_json(mmh::default_scenario()) << "\n";
      std::cout << "wrote " << emit_default << "\n";
      return 0;
    }

    mmh::ScenarioConfig cfg =
        config_path.empty() ? mmh::default_scenario() : mmh::load_config(config_path);
    if (!scheme.empty()) cfg.scheduler.scheme = mmh::scheme_from_string(scheme);
    if (nu > 0.0) cfg.scheduler.nu = nu;
    if (kappa > 0.0) cfg.scheduler.learning.kappa = kappa;
    if (arrival_gbps > 0.0)
      for (auto& f : cfg.flows) f.mean_arrival_bps = arrival_gbps * 1e9;
    if (epsilon > 0.0) cfg.urllc.violation_prob = epsilon;

    if (!sweep_path.empty()) {
      const mmh::SweepGrid grid = mmh::load_grid(sweep_path);
      const mmh::SweepReport report = mmh::run_sweep(cfg, grid, slots, jobs, out_dir);
      if (!report_path.empty()) std::ofstream(report_path) << report.report_json << "\n";
      std::cout << report.report_json << "\n";
      int failed = 0;
      for (const auto& c : report.cells) failed += c.failed ? 1 : 0;
      if (failed > 0) std::cerr << failed << " cell(s) failed\n";
      return report.hard_fail || failed > 0 ? 1 : 0;
    }

    std::filesystem::create_directories(out_dir);
    mmh::EpisodeOptions opt;
    opt.slots = slots;
    opt.seed = seed;
    opt.keep_trace = keep_trace;
    const mmh::EpisodeResult result = mmh::run_episode(cfg, opt);
    std::ofstream(std::filesystem::path(out_dir) / "summary.json")
        << mmh::summary_to_json(result.summary) << "\n";
    if (keep_trace) write_trace_csv(out_dir, result.trace);
    std::cout << mmh::summary_to_json(result.summary) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
