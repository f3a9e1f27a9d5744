#pragma once

#include <deque>
#include <random>
#include <vector>

#include "mmh/common.hpp"
#include "mmh/topology.hpp"

namespace mmh {

struct UrllcParams {
  double delay_bound_s = 0.01;   // beta
  double violation_prob = 0.05;  // delta (the evaluation's epsilon)

  double bound_slots(double slot_s) const { return delay_bound_s / slot_s; }
};

/// Per-episode queue bookkeeping. Physical queues and cumulative histories are
/// in bits; virtual queues are kept in per-flow normalized rate units
/// (1 unit = max_rate * slot). Indexed [flow][node-index].
struct QueueState {
  int n_flows = 0;
  int n_nodes = 0;
  long slot = 0;

  std::vector<std::vector<double>> q;             // bits
  std::vector<double> y;                          // normalized
  std::vector<std::vector<double>> cum_served;    // bits, actually-transmitted
  std::vector<std::vector<double>> cum_incoming;  // bits

  // Ring buffers for the optional sliding-window delay terms.
  bool windowed = false;
  int window_slots = 0;
  std::vector<std::vector<std::deque<double>>> served_hist, incoming_hist;
  std::vector<std::vector<double>> win_served, win_incoming;

  QueueState() = default;
  QueueState(int flows, int nodes, bool windowed_mode = false, int window = 0);

  /// Accumulates one slot of actual service/incoming for the history terms.
  void record_service(int flow, int node, double served_bits, double incoming_bits);
};

/// Poisson(mean_arrival * slot) truncated at max_rate * slot, in bits.
double draw_arrivals_bits(const FlowSpec& flow, double slot_s, std::mt19937_64& rng);

/// max(q - served_total, 0) + arrivals, all in bits.
double step_mbs_queue(double q, double served_total, double arrivals);

/// max(q - served, 0) + incoming.
double step_relay_queue(double q, double served, double incoming);

/// max(y + phi - x, 0).
double step_virtual_queue(double y, double phi, double x);

/// Historical delay-constraint left-hand side D_i^f in bits:
///   MBS:   mean_arrival*(t - delta*beta_slots) - cum_served
///   relay: -mean_arrival*delta*beta_slots + (cum_incoming - cum_served)
/// The current slot's service (MBS) or service differential (relay) must
/// weakly exceed it; non-positive values mean the constraint is inactive.
double delay_term_bits(const QueueState& state, int flow, int node_idx, bool is_mbs,
                       double mean_arrival_bits_per_slot, const UrllcParams& urllc,
                       double slot_s);

/// Markov-inequality queue bound mean_arrival * delta * beta, in bits.
double markov_queue_bound_bits(double mean_arrival_bps, const UrllcParams& urllc);

/// Little's law: average delay = average queue / average arrival rate.
double little_delay_s(double avg_queue_bits, double mean_arrival_bps);

}  // namespace mmh
