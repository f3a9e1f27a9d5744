#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmh/topology.hpp"
#include "mmh/trace.hpp"

namespace mmh {

/// Aggregates of one episode; serialized to summary.json (docs/output_schema.md).
struct RunSummary {
  std::string scheme;
  uint64_t seed = 0;
  long slots = 0;
  long warmup_slots = 0;

  /// Mean instantaneous one-hop delay per (flow, node), seconds.
  std::map<std::pair<int, int>, double> avg_one_hop_delay_s;
  double mean_one_hop_delay_s = 0.0;   // pooled over flows/nodes, post warm-up
  std::vector<float> delay_samples_s;  // pooled per-slot Q/lambda samples
  double violation_prob = 0.0;         // empirical Pr(one-hop delay > beta)
  double tail_resolution = 0.0;        // 1 / sample count
  std::vector<double> avg_mbs_queue_bits;  // per flow
  std::vector<double> throughput_bps;      // delivered at the UE, per flow
  std::vector<double> arrival_bps;         // configured means, for reference

  std::vector<int> sca_iterations;     // per solved slot
  double sca_p90 = 0.0;
  long sca_monotonicity_violations = 0;
  double max_sca_dip = 0.0;            // largest objective decrease observed

  long q_bound_violations = 0;         // Q above (nu*kappa + 1) cap units
  long y_bound_violations = 0;
  double max_q_cap_units = 0.0;        // max over slots of Q / (max_rate*slot)
  double max_y = 0.0;

  double utility_phi_avg = 0.0;        // time-avg sum_f U(phi_f)
  double utility_x_avg = 0.0;          // time-avg sum_f U(x_f / cap)
  double psi_estimate = 0.0;           // max slotwise quadratic drift term
  double chi_estimate = 0.0;           // mean gap to the unconstrained subproblem optimum
  double avg_total_queue_units = 0.0;  // sum_f (Y_f + sum_i Q~) time average

  long learner_converged_window = -1;  // first window with sustained small steps
  long restore_slots = 0;
  double wall_seconds = 0.0;
};

std::string summary_to_json(const RunSummary& summary);

/// Fraction of samples strictly greater than each threshold.
std::vector<double> ccdf(const std::vector<float>& samples, const std::vector<double>& thresholds);

/// Empirical violation probability with resolution disclaimer: probabilities
/// below 1/n are reported as "<1/n" rather than 0.
std::string format_tail_probability(double prob, std::size_t n_samples);

struct HopDelays {
  std::map<std::pair<int, int>, double> avg_delay_s;  // little-law windowed average
  std::vector<float> samples_s;                       // instantaneous Q/lambda
};

/// Per-(flow, node) delays from a queue trace via Little's law, plus the
/// per-slot instantaneous samples used for CCDFs.
HopDelays per_hop_delays(const std::vector<QueueRow>& rows, const NetworkModel& model);

}  // namespace mmh
