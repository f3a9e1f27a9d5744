#include "mmh/queueing.hpp"

#include <algorithm>
#include <cmath>

namespace mmh {

QueueState::QueueState(int flows, int nodes, bool windowed_mode, int window)
    : n_flows(flows),
      n_nodes(nodes),
      q(flows, std::vector<double>(nodes, 0.0)),
      y(flows, 0.0),
      cum_served(flows, std::vector<double>(nodes, 0.0)),
      cum_incoming(flows, std::vector<double>(nodes, 0.0)),
      windowed(windowed_mode),
      window_slots(window) {
  if (windowed) {
    served_hist.assign(flows, std::vector<std::deque<double>>(nodes));
    incoming_hist.assign(flows, std::vector<std::deque<double>>(nodes));
    win_served.assign(flows, std::vector<double>(nodes, 0.0));
    win_incoming.assign(flows, std::vector<double>(nodes, 0.0));
  }
}

void QueueState::record_service(int flow, int node, double served_bits, double incoming_bits) {
  cum_served[flow][node] += served_bits;
  cum_incoming[flow][node] += incoming_bits;
  if (!windowed) return;
  auto& sh = served_hist[flow][node];
  auto& ih = incoming_hist[flow][node];
  sh.push_back(served_bits);
  ih.push_back(incoming_bits);
  win_served[flow][node] += served_bits;
  win_incoming[flow][node] += incoming_bits;
  while (int(sh.size()) > window_slots) {
    win_served[flow][node] -= sh.front();
    win_incoming[flow][node] -= ih.front();
    sh.pop_front();
    ih.pop_front();
  }
}

double draw_arrivals_bits(const FlowSpec& flow, double slot_s, std::mt19937_64& rng) {
  const double mean = flow.mean_arrival_bps * slot_s;
  if (!(mean > 0.0)) return 0.0;
  std::poisson_distribution<long long> poisson(mean);
  const double cap = flow.max_rate_bps * slot_s;
  return std::min(double(poisson(rng)), cap);
}

double step_mbs_queue(double q, double served_total, double arrivals) {
  return std::max(q - served_total, 0.0) + arrivals;
}

double step_relay_queue(double q, double served, double incoming) {
  return std::max(q - served, 0.0) + incoming;
}

double step_virtual_queue(double y, double phi, double x) {
  return std::max(y + phi - x, 0.0);
}

double delay_term_bits(const QueueState& state, int flow, int node_idx, bool is_mbs,
                       double mean_arrival_bits_per_slot, const UrllcParams& urllc,
                       double slot_s) {
  const double beta_slots = urllc.bound_slots(slot_s);
  const double headroom = mean_arrival_bits_per_slot * urllc.violation_prob * beta_slots;
  if (is_mbs) {
    double t = double(state.slot);
    double served = state.cum_served[flow][node_idx];
    if (state.windowed) {
      t = std::min(t, double(state.window_slots));
      served = state.win_served[flow][node_idx];
    }
    return mean_arrival_bits_per_slot * t - headroom - served;
  }
  const double in = state.windowed ? state.win_incoming[flow][node_idx]
                                   : state.cum_incoming[flow][node_idx];
  const double out =
      state.windowed ? state.win_served[flow][node_idx] : state.cum_served[flow][node_idx];
  return (in - out) - headroom;
}

double markov_queue_bound_bits(double mean_arrival_bps, const UrllcParams& urllc) {
  return mean_arrival_bps * urllc.violation_prob * urllc.delay_bound_s;
}

double little_delay_s(double avg_queue_bits, double mean_arrival_bps) {
  if (!(mean_arrival_bps > 0.0)) throw Error(Errc::ZeroArrivalRate, "mean arrival rate is zero");
  return avg_queue_bits / mean_arrival_bps;
}

}  // namespace mmh
