#pragma once

#include <vector>

#include "mmh/channel.hpp"
#include "mmh/conic.hpp"
#include "mmh/queueing.hpp"
#include "mmh/scheduler_params.hpp"
#include "mmh/topology.hpp"

namespace mmh {

/// One transmit-power variable: a directed link carrying one flow. `gain` is
/// effective_gain / noise_power (1/W), so ln(1 + gain * p) is the link rate in
/// nats per slot-band; rate_bits = nats_to_bits * nats.
struct LinkVar {
  int from = -1;
  int to = -1;
  int flow = -1;
  int path = -1;  // index into the flow's path table
  double gain = 0.0;
};

/// Per-slot rate/power subproblem after the flow split is fixed.
struct RateProblem {
  struct RelayHop {
    int node = -1;
    int in_link = -1;   // index into links; -1 when the relay only drains
    int out_link = -1;
    double delay_nats = 0.0;  // history term D_i^f scaled to nats
    bool row_active = false;  // emit the ratio row for this hop
  };
  struct PathAlloc {
    int path = -1;
    int first_hop_link = -1;  // -1 when the path carries no new traffic this window
    std::vector<RelayHop> relays;
  };
  struct FlowProblem {
    int flow = -1;
    double weight = 0.0;      // virtual-queue weight on the admitted rate, per nat
    double cap_nats = 0.0;    // max_rate * slot in nats
    double mbs_delay_nats = 0.0;
    bool mbs_row = false;
    std::vector<PathAlloc> paths;
  };
  struct NodeBudget {
    int node = -1;
    double max_power_w = 0.0;
    std::vector<int> links;  // indices into links drawing from this budget
  };

  std::vector<LinkVar> links;
  /// Objective weight per nat of each link's own rate: zero for plain links,
  /// the drain bonus for backlogged relays, the queue differential for the
  /// max-weight schemes.
  std::vector<double> link_service_weight;
  std::vector<FlowProblem> flows;
  std::vector<NodeBudget> budgets;
  double nats_to_bits = 1.0;      // bandwidth * slot / ln 2
  bool slack_delay_rows = false;  // set by feasibility_restore
};

struct RateProblemOptions {
  bool include_delay_rows = true;     // history-derived rows (MBS floor and relay ratio)
  bool relay_rows_always_on = true;
  bool mbs_delay_row = true;
  double drain_bonus_weight = 1e-3;   // relative to the mean flow weight
  double drain_queue_threshold_bits = 0.0;  // keep drain links for backlogged deselected relays
};

/// Assembles the subproblem from current queues, the flow split and the slot's
/// channel realizations. `split[f]` flags which paths of flow f carry new
/// traffic; relays of deselected paths keep drain links while backlogged.
RateProblem build_rate_problem(const NetworkModel& model, const QueueState& queues,
                               const std::vector<std::vector<char>>& split,
                               const std::vector<LinkRealization>& realizations,
                               const ChannelParams& channel, const UrllcParams& urllc,
                               const RateProblemOptions& options);

/// Slack reformulation of one relay ratio constraint
///   (1 + p_out g_out) / (1 + p_in g_in) >= e^D
/// into the SOC row (2 + p_out g_out)/2 >= ||(y, p_out g_out / 2)|| plus the
/// quad-over-affine row y^2 / (1 + p_in g_in) >= e^D tagged for linearization.
struct SocReformulation {
  SocRow soc;           // over (y, p_out), in program coordinates
  double qoa_rhs = 0.0; // e^D
};
SocReformulation soc_reformulate(double gain_out, double delay_nats, int y_var, int p_out_var,
                                 int n_vars);

/// First-order surrogate of the quad-over-affine row around (y_l, p_in_l):
///   2 y y_l / (1 + p_l g) - y_l^2 (1 + p g) / (1 + p_l g)^2 >= e^D.
/// Returned as a LinearRow over (y, p_in); exact at the expansion point and a
/// global under-estimator of y^2 / (1 + g p) for y, p >= 0.
LinearRow linearize_qoa(double y_l, double p_in_l, double gain_in, double delay_nats, int y_var,
                        int p_in_var, int n_vars);

/// y^2 / (1 + g p); shared by tests and the linearization checks.
double quad_over_affine(double y, double p, double gain);

struct ScaResult {
  SolveStatus status = SolveStatus::Optimal;
  std::vector<double> x_bits;           // admitted rate per flow, bits/slot
  std::vector<double> link_power_w;     // per LinkVar
  std::vector<double> link_rate_bits;   // per LinkVar, bits/slot
  std::vector<double> slack_nats;       // per delay row when restored, else empty
  double total_slack_nats = 0.0;
  int iterations = 0;
  bool used_restore = false;
  std::vector<double> objective_trace;  // accepted iterate objectives, nondecreasing
  double rejected_dip = 0.0;  // magnitude of a sub-precision final dip, if any
};

struct ScaOptions {
  double tol = 1e-2;
  int max_iter = 50;
  double slack_weight_factor = 1e6;  // W_slack = factor * max flow weight
  bool always_slack = false;         // skip the infeasible -> restore round trip
  SolverOptions solver;
};

/// Iterative rate allocation: solve the convex surrogate, move the expansion
/// point to the solution, repeat until the objective gain drops below tol.
/// The accepted sequence is nondecreasing and the returned point feasible for
/// the original ratio constraints (up to reported slacks).
ScaResult sca_solve(const RateProblem& problem, const ScaOptions& options = {});

/// Copy of the problem with nonnegative slack added to every delay row; exact
/// penalty keeps slacks at zero whenever the original problem is feasible.
RateProblem feasibility_restore(const RateProblem& problem);

}  // namespace mmh
