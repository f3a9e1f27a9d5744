#include "mmh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mmh/common.hpp"
#include "mmh/queueing.hpp"

namespace mmh {

using nlohmann::json;

std::vector<double> ccdf(const std::vector<float>& samples, const std::vector<double>& thresholds) {
  if (samples.empty()) throw Error(Errc::BadConfig, "ccdf needs at least one sample");
  std::vector<float> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double thr : thresholds) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), float(thr));
    out.push_back(double(sorted.end() - it) / double(sorted.size()));
  }
  return out;
}

std::string format_tail_probability(double prob, std::size_t n_samples) {
  std::ostringstream os;
  const double resolution = n_samples > 0 ? 1.0 / double(n_samples) : 1.0;
  if (prob <= 0.0 || prob < resolution) {
    os << "<" << resolution;
  } else {
    os << prob;
  }
  os << " (resolution 1/" << n_samples << ")";
  return os.str();
}

HopDelays per_hop_delays(const std::vector<QueueRow>& rows, const NetworkModel& model) {
  HopDelays out;
  std::map<std::pair<int, int>, std::pair<double, long>> acc;
  for (const auto& row : rows) {
    const auto& flow = model.flows.at(row.flow);
    const double delay =
        row.q_bits / (flow.mean_arrival_bps * model.slot_duration_s) * model.slot_duration_s;
    out.samples_s.push_back(float(delay));
    auto& a = acc[{row.flow, row.node}];
    a.first += row.q_bits;
    ++a.second;
  }
  for (const auto& [key, a] : acc) {
    const auto& flow = model.flows.at(key.first);
    out.avg_delay_s[key] = little_delay_s(a.first / double(a.second), flow.mean_arrival_bps);
  }
  return out;
}

namespace {

// Floats in the frozen output schema carry 9 significant digits.
double sig9(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double mag = std::pow(10.0, 8 - std::floor(std::log10(std::abs(v))));
  return std::round(v * mag) / mag;
}

json sig9_vec(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(sig9(x));
  return out;
}

}  // namespace

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["scheme"] = s.scheme;
  j["seed"] = s.seed;
  j["slots"] = s.slots;
  j["warmup_slots"] = s.warmup_slots;
  j["mean_one_hop_delay_s"] = sig9(s.mean_one_hop_delay_s);
  j["violation_prob"] = sig9(s.violation_prob);
  j["violation_prob_display"] =
      format_tail_probability(s.violation_prob, s.delay_samples_s.size());
  j["tail_resolution"] = sig9(s.tail_resolution);
  j["avg_mbs_queue_bits"] = sig9_vec(s.avg_mbs_queue_bits);
  j["throughput_bps"] = sig9_vec(s.throughput_bps);
  j["arrival_bps"] = sig9_vec(s.arrival_bps);
  {
    json hops = json::array();
    for (const auto& [key, d] : s.avg_one_hop_delay_s)
      hops.push_back({{"flow", key.first}, {"node", key.second}, {"avg_delay_s", sig9(d)}});
    j["avg_one_hop_delay"] = hops;
  }
  // Delay CCDF on a fixed millisecond grid.
  if (!s.delay_samples_s.empty()) {
    std::vector<double> grid;
    for (double ms : {0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 25.0, 50.0})
      grid.push_back(ms * 1e-3);
    j["delay_ccdf_thresholds_s"] = sig9_vec(grid);
    j["delay_ccdf"] = sig9_vec(ccdf(s.delay_samples_s, grid));
  }
  if (!s.sca_iterations.empty()) {
    std::map<int, long> hist;
    for (int i : s.sca_iterations) ++hist[i];
    json h = json::object();
    for (const auto& [iters, count] : hist) h[std::to_string(iters)] = count;
    j["sca_iterations_hist"] = h;
    j["sca_p90"] = s.sca_p90;
  }
  j["sca_monotonicity_violations"] = s.sca_monotonicity_violations;
  j["max_sca_dip"] = sig9(s.max_sca_dip);
  j["q_bound_violations"] = s.q_bound_violations;
  j["y_bound_violations"] = s.y_bound_violations;
  j["max_q_cap_units"] = sig9(s.max_q_cap_units);
  j["max_y"] = sig9(s.max_y);
  j["utility_phi_avg"] = sig9(s.utility_phi_avg);
  j["utility_x_avg"] = sig9(s.utility_x_avg);
  j["psi_estimate"] = sig9(s.psi_estimate);
  j["chi_estimate"] = sig9(s.chi_estimate);
  j["avg_total_queue_units"] = sig9(s.avg_total_queue_units);
  j["learner_converged_window"] = s.learner_converged_window;
  j["restore_slots"] = s.restore_slots;
  j["wall_seconds"] = sig9(s.wall_seconds);
  return j.dump(2);
}

}  // namespace mmh
