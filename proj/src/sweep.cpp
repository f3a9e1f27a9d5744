#include "mmh/sweep.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mmh/scheduler.hpp"

namespace mmh {

using nlohmann::json;

SweepGrid parse_grid(const std::string& json_text) {
  json j = json::parse(json_text);
  SweepGrid g;
  if (j.contains("schemes"))
    for (const auto& s : j.at("schemes")) g.schemes.push_back(s.get<std::string>());
  if (j.contains("seeds"))
    for (const auto& s : j.at("seeds")) g.seeds.push_back(s.get<uint64_t>());
  if (j.contains("arrival_gbps"))
    for (const auto& s : j.at("arrival_gbps")) g.arrival_gbps.push_back(s.get<double>());
  if (j.contains("nu"))
    for (const auto& s : j.at("nu")) g.nu.push_back(s.get<double>());
  if (j.contains("kappa"))
    for (const auto& s : j.at("kappa")) g.kappa.push_back(s.get<double>());
  if (j.contains("epsilon"))
    for (const auto& s : j.at("epsilon")) g.epsilon.push_back(s.get<double>());
  g.slots = j.contains("slots") ? j.at("slots").get<long>() : 0;
  return g;
}

SweepGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadConfig, "cannot open grid file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str());
}

namespace {

struct CellSpec {
  std::string scheme;
  uint64_t seed = 1;
  double arrival_gbps = 0.0;  // 0 = base
  double nu = 0.0;
  double kappa = 0.0;
  double epsilon = 0.0;
};

std::string cell_name(const CellSpec& c) {
  std::ostringstream os;
  os << c.scheme << "_s" << c.seed;
  if (c.arrival_gbps > 0.0) os << "_a" << c.arrival_gbps;
  if (c.nu > 0.0) os << "_nu" << c.nu;
  if (c.kappa > 0.0) os << "_k" << c.kappa;
  if (c.epsilon > 0.0) os << "_e" << c.epsilon;
  return os.str();
}

}  // namespace

SweepReport run_sweep(const ScenarioConfig& base, const SweepGrid& grid, long default_slots,
                      int jobs, const std::string& out_dir) {
  std::vector<std::string> schemes =
      grid.schemes.empty() ? std::vector<std::string>{to_string(base.scheduler.scheme)}
                           : grid.schemes;
  std::vector<uint64_t> seeds = grid.seeds.empty() ? std::vector<uint64_t>{1} : grid.seeds;
  std::vector<double> arrivals = grid.arrival_gbps.empty() ? std::vector<double>{0.0}
                                                           : grid.arrival_gbps;
  std::vector<double> nus = grid.nu.empty() ? std::vector<double>{0.0} : grid.nu;
  std::vector<double> kappas = grid.kappa.empty() ? std::vector<double>{0.0} : grid.kappa;
  std::vector<double> epsilons = grid.epsilon.empty() ? std::vector<double>{0.0} : grid.epsilon;
  const long slots = grid.slots > 0 ? grid.slots : default_slots;

  std::vector<CellSpec> specs;
  for (const auto& scheme : schemes)
    for (uint64_t seed : seeds)
      for (double a : arrivals)
        for (double nu : nus)
          for (double kappa : kappas)
            for (double eps : epsilons) specs.push_back({scheme, seed, a, nu, kappa, eps});

  SweepReport report;
  report.cells.resize(specs.size());
  std::filesystem::create_directories(out_dir);

  std::atomic<size_t> next{0};
  std::mutex mu;
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      const auto& spec = specs[i];
      SweepCell cell;
      cell.name = cell_name(spec);
      try {
        ScenarioConfig cfg = base;
        cfg.scheduler.scheme = scheme_from_string(spec.scheme);
        if (spec.arrival_gbps > 0.0)
          for (auto& f : cfg.flows) f.mean_arrival_bps = spec.arrival_gbps * 1e9;
        if (spec.nu > 0.0) cfg.scheduler.nu = spec.nu;
        if (spec.kappa > 0.0) cfg.scheduler.learning.kappa = spec.kappa;
        if (spec.epsilon > 0.0) cfg.urllc.violation_prob = spec.epsilon;

        EpisodeOptions opt;
        opt.slots = slots;
        opt.seed = spec.seed;
        cell.summary = run_episode(cfg, opt).summary;

        const auto dir = std::filesystem::path(out_dir) / cell.name;
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "summary.json") << summary_to_json(cell.summary) << "\n";
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      std::lock_guard<std::mutex> lock(mu);
      report.cells[i] = std::move(cell);
    }
  };
  const int n_workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // Combined report: per-scheme delay table, trend tables, hard assertions.
  json rep;
  std::map<std::string, std::pair<double, int>> delay_by_scheme;
  std::map<double, std::pair<double, int>> queue_by_nu, delay_by_kappa, tail_by_eps;
  for (const auto& cell : report.cells) {
    if (cell.failed) {
      rep["failed_cells"].push_back({{"name", cell.name}, {"error", cell.error}});
      continue;
    }
    const auto& s = cell.summary;
    auto& d = delay_by_scheme[s.scheme];
    d.first += s.mean_one_hop_delay_s;
    ++d.second;
    if (s.scheme == "Proposed" &&
        (s.q_bound_violations > 0 || s.y_bound_violations > 0 ||
         s.sca_monotonicity_violations > 0))
      report.hard_fail = true;
  }
  for (size_t i = 0; i < specs.size(); ++i) {
    if (report.cells[i].failed) continue;
    const auto& s = report.cells[i].summary;
    if (specs[i].nu > 0.0) {
      auto& q = queue_by_nu[specs[i].nu];
      q.first += s.avg_total_queue_units;
      ++q.second;
    }
    if (specs[i].kappa > 0.0) {
      auto& d = delay_by_kappa[specs[i].kappa];
      d.first += s.mean_one_hop_delay_s;
      ++d.second;
    }
    if (specs[i].epsilon > 0.0) {
      auto& v = tail_by_eps[specs[i].epsilon];
      v.first += s.violation_prob;
      ++v.second;
    }
  }
  for (const auto& [scheme, acc] : delay_by_scheme)
    rep["mean_one_hop_delay_s_by_scheme"][scheme] = acc.first / acc.second;
  for (const auto& [nu, acc] : queue_by_nu)
    rep["avg_total_queue_units_by_nu"][std::to_string(nu)] = acc.first / acc.second;
  for (const auto& [kappa, acc] : delay_by_kappa)
    rep["mean_one_hop_delay_s_by_kappa"][std::to_string(kappa)] = acc.first / acc.second;
  for (const auto& [eps, acc] : tail_by_eps)
    rep["violation_prob_by_epsilon"][std::to_string(eps)] = acc.first / acc.second;

  // Ordering check when the canonical four schemes are present.
  const char* order[] = {"Proposed", "Baseline1", "Baseline2", "Baseline3"};
  bool have_all = true;
  for (const char* s : order) have_all = have_all && delay_by_scheme.count(s);
  if (have_all) {
    bool ordered = true;
    for (int k = 0; k + 1 < 4; ++k) {
      const auto& a = delay_by_scheme[order[k]];
      const auto& b = delay_by_scheme[order[k + 1]];
      ordered = ordered && a.first / a.second < b.first / b.second;
    }
    rep["baseline_ordering_holds"] = ordered;
  }
  rep["hard_fail"] = report.hard_fail;
  report.report_json = rep.dump(2);
  std::ofstream(std::filesystem::path(out_dir) / "report.json") << report.report_json << "\n";
  return report;
}

}  // namespace mmh
