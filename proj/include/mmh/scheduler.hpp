#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mmh/channel.hpp"
#include "mmh/config.hpp"
#include "mmh/metrics.hpp"
#include "mmh/path_learning.hpp"
#include "mmh/queueing.hpp"
#include "mmh/rate_alloc.hpp"
#include "mmh/scheduler_params.hpp"
#include "mmh/topology.hpp"
#include "mmh/trace.hpp"

namespace mmh {

/// SP2 closed form. Log1p: clamp(nu/y - 1, 0, cap); PaperLog: min(nu/y, cap),
/// cap when y = 0. Normalized rate units (cap = 1 for the default scenario).
double auxiliary_opt(double y, double nu, double cap, UtilityForm form);

/// What each scheme changes relative to the full controller: whether the
/// history-derived delay rows are emitted, whether the path split is learned,
/// and whether routing collapses to the direct MBS->UE link.
struct RateRule {
  bool delay_rows = true;
  bool learned_ps = true;
  bool single_hop = false;
};
RateRule scheme_rate_rule(Scheme scheme);

struct EpisodeOptions {
  long slots = 10000;
  uint64_t seed = 1;
  double warmup_fraction = 0.1;
  bool keep_trace = false;       // retain in-memory rows (queues/allocs/learner/sca)
  bool estimate_chi = false;     // extra genie subproblem solves on sampled slots
  long chi_sample_stride = 200;
};

struct EpisodeResult {
  RunSummary summary;
  Trace trace;
};

/// Empirical Theorem-style report assembled from a finished run.
struct AnalysisBounds {
  double kappa_derivative = 1.0;   // largest right derivative of U
  double psi_estimate = 0.0;
  double chi_estimate = 0.0;
  double genie_utility = 0.0;      // U0* surrogate
  double achieved_utility = 0.0;
  double utility_lower_bound = 0.0;  // U0* - (psi + chi)/nu
  bool bound_satisfied = false;
};

AnalysisBounds estimate_bounds(const RunSummary& run, const RunSummary& genie, double nu);

/// Runs one episode of `slots` slots under the configured scheme.
/// Deterministic in (config, seed, scheme).
EpisodeResult run_episode(const NetworkModel& model, const ChannelParams& channel,
                          const UrllcParams& urllc, const SchedulerParams& params,
                          const EpisodeOptions& options);

/// Convenience overload resolving everything from a scenario config.
EpisodeResult run_episode(const ScenarioConfig& config, const EpisodeOptions& options);

/// Genie surrogate for the utility optimum: delay rows off, large nu.
RunSummary run_genie(const ScenarioConfig& config, const EpisodeOptions& options);

}  // namespace mmh
