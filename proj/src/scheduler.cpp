#include "mmh/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace mmh {

Scheme scheme_from_string(const std::string& name) {
  if (name == "Proposed" || name == "proposed") return Scheme::Proposed;
  if (name == "Baseline1" || name == "baseline1") return Scheme::Baseline1;
  if (name == "Baseline2" || name == "baseline2") return Scheme::Baseline2;
  if (name == "Baseline3" || name == "baseline3") return Scheme::Baseline3;
  if (name == "SingleHop" || name == "singlehop" || name == "single_hop") return Scheme::SingleHop;
  throw Error(Errc::BadConfig, "unknown scheme: " + name);
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Proposed: return "Proposed";
    case Scheme::Baseline1: return "Baseline1";
    case Scheme::Baseline2: return "Baseline2";
    case Scheme::Baseline3: return "Baseline3";
    case Scheme::SingleHop: return "SingleHop";
  }
  return "?";
}

double auxiliary_opt(double y, double nu, double cap, UtilityForm form) {
  if (!(nu > 0.0)) return 0.0;
  if (form == UtilityForm::PaperLog) {
    if (y <= 0.0) return cap;
    return std::min(std::max(nu / y, 0.0), cap);
  }
  if (y <= 0.0) return cap;
  return std::min(std::max(nu / y - 1.0, 0.0), cap);
}

AnalysisBounds estimate_bounds(const RunSummary& run, const RunSummary& genie, double nu) {
  AnalysisBounds out;
  out.psi_estimate = run.psi_estimate;
  out.chi_estimate = run.chi_estimate;
  out.genie_utility = genie.utility_phi_avg;
  out.achieved_utility = run.utility_phi_avg;
  out.utility_lower_bound = out.genie_utility - (out.psi_estimate + out.chi_estimate) / nu;
  out.bound_satisfied = out.achieved_utility >= out.utility_lower_bound - 1e-9;
  return out;
}

RateRule scheme_rate_rule(Scheme scheme) {
  switch (scheme) {
    case Scheme::Proposed: return {true, true, false};
    case Scheme::Baseline1: return {false, true, false};
    case Scheme::Baseline2: return {true, false, false};
    case Scheme::Baseline3: return {false, false, false};
    case Scheme::SingleHop: return {true, false, true};
  }
  return {};
}

namespace {

struct WindowStats {
  long slots = 0;
  std::vector<double> q_sum;                          // per node index, bits
  std::vector<double> first_rate_sum;                 // per path, bits
  std::vector<std::vector<double>> relay_in_sum;      // per path, per relay, bits
  std::vector<std::vector<double>> relay_out_sum;     // per path, per relay, bits

  void reset() {
    slots = 0;
    std::fill(q_sum.begin(), q_sum.end(), 0.0);
    std::fill(first_rate_sum.begin(), first_rate_sum.end(), 0.0);
    for (auto& v : relay_in_sum) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : relay_out_sum) std::fill(v.begin(), v.end(), 0.0);
  }
};

}  // namespace

EpisodeResult run_episode(const NetworkModel& model_in, const ChannelParams& channel,
                          const UrllcParams& urllc, const SchedulerParams& params,
                          const EpisodeOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();

  const auto schedule_report = validate_schedule(params.learning);
  if (!schedule_report.ok) {
    std::string what = "learning schedule violates the convergence conditions:";
    for (const auto& v : schedule_report.violations) what += " [" + v + "]";
    throw Error(Errc::BadConfig, what);
  }
  if (!(params.nu > 0.0)) throw Error(Errc::BadConfig, "nu must be positive");
  if (params.long_period < 1) throw Error(Errc::BadConfig, "long_period must be >= 1");

  // The single-hop scheme replaces every flow's path table by the direct link.
  NetworkModel model = model_in;
  const RateRule behavior = scheme_rate_rule(params.scheme);
  if (behavior.single_hop) {
    for (auto& flow : model.flows) {
      if (!model.has_link(model.mbs_id(), flow.destination))
        throw Error(Errc::DanglingPathHop,
                    "single-hop scheme needs a direct MBS->UE link for flow " +
                        std::to_string(flow.id));
      flow.paths = {PathSpec{{model.mbs_id(), flow.destination}}};
      flow.n_select = 1;
    }
  }

  const int n_flows = int(model.flows.size());
  const int n_nodes = int(model.nodes.size());
  const double slot_s = model.slot_duration_s;
  const double beta_slots = urllc.bound_slots(slot_s);
  const int mbs_idx = model.node_index.at(model.mbs_id());

  QueueState qs(n_flows, n_nodes, params.windowed_delay_terms,
                int(std::lround(beta_slots)));

  std::vector<FlowLearner> learners;
  std::vector<WindowStats> window(n_flows);
  std::vector<std::vector<char>> split(n_flows);
  std::vector<std::vector<char>> prev_split(n_flows);
  std::vector<double> cap_bits(n_flows), arrival_bits_mean(n_flows);
  for (int f = 0; f < n_flows; ++f) {
    const auto& flow = model.flows[f];
    learners.emplace_back(int(flow.paths.size()));
    cap_bits[f] = flow.max_rate_bps * slot_s;
    arrival_bits_mean[f] = flow.mean_arrival_bps * slot_s;
    window[f].q_sum.assign(n_nodes, 0.0);
    window[f].first_rate_sum.assign(flow.paths.size(), 0.0);
    window[f].relay_in_sum.resize(flow.paths.size());
    window[f].relay_out_sum.resize(flow.paths.size());
    for (size_t p = 0; p < flow.paths.size(); ++p) {
      const int n_relays = std::max(int(flow.paths[p].hops.size()) - 2, 0);
      window[f].relay_in_sum[p].assign(n_relays, 0.0);
      window[f].relay_out_sum[p].assign(n_relays, 0.0);
    }
    split[f].assign(flow.paths.size(), 0);
  }

  // Independent substreams so all schemes see identical arrivals and channels
  // under the same master seed.
  std::mt19937_64 channel_rng = make_stream(options.seed, 1);
  std::vector<std::mt19937_64> arrival_rng, learner_rng, scheme_rng;
  for (int f = 0; f < n_flows; ++f) {
    arrival_rng.push_back(make_stream(options.seed, 1000 + f));
    learner_rng.push_back(make_stream(options.seed, 2000 + f));
    scheme_rng.push_back(make_stream(options.seed, 3000 + f));
  }

  RateProblemOptions rp_options;
  rp_options.include_delay_rows = behavior.delay_rows;
  rp_options.relay_rows_always_on = params.relay_rows_always_on;
  rp_options.mbs_delay_row = params.mbs_delay_row;
  rp_options.drain_queue_threshold_bits = 1.0;

  ScaOptions sca_options;
  sca_options.tol = params.sca_tol;
  sca_options.max_iter = params.sca_max_iter;

  EpisodeResult out;
  RunSummary& sum = out.summary;
  sum.scheme = to_string(params.scheme);
  sum.seed = options.seed;
  sum.slots = options.slots;
  sum.warmup_slots = long(options.slots * options.warmup_fraction);
  sum.arrival_bps.resize(n_flows);
  for (int f = 0; f < n_flows; ++f) sum.arrival_bps[f] = model.flows[f].mean_arrival_bps;

  std::vector<double> delivered_bits(n_flows, 0.0);
  std::vector<double> mbs_q_sum(n_flows, 0.0);
  long post_warmup_slots = 0;
  double utility_phi_acc = 0.0, utility_x_acc = 0.0, total_queue_acc = 0.0;
  double chi_acc = 0.0;
  long chi_samples = 0;
  std::map<std::pair<int, int>, std::pair<double, long>> delay_acc;  // (flow,node)->(sum, count)
  std::vector<double> window_l1(n_flows, 0.0);
  std::vector<double> l1_by_window;  // max over flows
  std::vector<LinkRealization> realizations(model.links.size());
  const double q_cap_bound = params.nu + 1.0;  // kappa = 1 under the log1p utility

  for (long t = 0; t < options.slots; ++t) {
    // --- long timescale: learning and path re-selection ---
    if (t % params.long_period == 0) {
      const long stage = t / params.long_period;
      double stage_l1 = 0.0;
      for (int f = 0; f < n_flows; ++f) {
        auto& flow = model.flows[f];
        auto& learner = learners[f];
        double flow_l1 = 0.0;
        if (stage > 0 && behavior.learned_ps) {
          // Feedback from the window that just ended, in learner units.
          PathFeedback fb;
          const double wslots = std::max<double>(window[f].slots, 1);
          const double q_unit = std::max(arrival_bits_mean[f], 1.0);
          fb.mbs_queue = window[f].q_sum[mbs_idx] / wslots / q_unit;
          for (size_t p = 0; p < flow.paths.size(); ++p) {
            PathFeedback::Path path;
            path.first_hop_rate = window[f].first_rate_sum[p] / wslots / cap_bits[f];
            const auto& hops = flow.paths[p].hops;
            for (size_t h = 1; h + 1 < hops.size(); ++h) {
              PathFeedback::Hop hop;
              const int node_idx = model.node_index.at(hops[h]);
              hop.queue = window[f].q_sum[node_idx] / wslots / q_unit;
              hop.in_rate = window[f].relay_in_sum[p][h - 1] / wslots / cap_bits[f];
              hop.out_rate = window[f].relay_out_sum[p][h - 1] / wslots / cap_bits[f];
              path.relays.push_back(hop);
            }
            fb.paths.push_back(std::move(path));
          }
          const auto utilities = path_utilities(fb);
          double feedback = 0.0;
          for (size_t p = 0; p < utilities.size(); ++p)
            if (prev_split[f][p]) feedback += utilities[p];
          flow_l1 = update_learner(learner, feedback, prev_split[f], params.learning, stage);
          stage_l1 = std::max(stage_l1, flow_l1);
        }
        window[f].reset();

        // New split for the coming window.
        std::vector<int> picked;
        if (behavior.learned_ps) {
          picked = sample_split(learner.prob, flow.n_select, learner_rng[f]);
        } else {
          const std::vector<double> uniform(flow.paths.size(), 1.0 / flow.paths.size());
          picked = sample_split(uniform, flow.n_select, scheme_rng[f]);
        }
        std::fill(split[f].begin(), split[f].end(), 0);
        for (int p : picked) split[f][p] = 1;
        prev_split[f] = split[f];

        if (options.keep_trace) {
          LearnerRow row;
          row.window = stage;
          row.slot = t;
          row.flow = f;
          row.pi = learner.prob;
          row.l1_step = flow_l1;
          out.trace.learner.push_back(std::move(row));
        }
      }
      if (stage > 0 && behavior.learned_ps) l1_by_window.push_back(stage_l1);
    }

    // --- SP2: auxiliary rates from the virtual queues ---
    std::vector<double> phi(n_flows);
    for (int f = 0; f < n_flows; ++f)
      phi[f] = auxiliary_opt(qs.y[f], params.nu, 1.0, params.utility);

    // --- channel realizations for every declared link (scheme independent) ---
    for (size_t l = 0; l < model.links.size(); ++l) {
      const auto& link = model.links[l];
      realizations[l] = sample_link(link.from, link.to, link.distance_m, channel, channel_rng);
    }

    // --- SP3: rate allocation ---
    const RateProblem problem =
        build_rate_problem(model, qs, split, realizations, channel, urllc, rp_options);
    const ScaResult alloc = sca_solve(problem, sca_options);
    if (alloc.status == SolveStatus::Infeasible)
      throw std::logic_error("rate allocation infeasible after restoration");
    sum.sca_iterations.push_back(alloc.iterations);
    if (alloc.used_restore) ++sum.restore_slots;
    sum.max_sca_dip = std::max(sum.max_sca_dip, alloc.rejected_dip);
    for (size_t k = 1; k < alloc.objective_trace.size(); ++k)
      if (alloc.objective_trace[k] < alloc.objective_trace[k - 1] - 1e-9)
        ++sum.sca_monotonicity_violations;
    if (options.keep_trace)
      out.trace.sca.push_back({t, alloc.iterations, alloc.used_restore});

    // Optional genie-subproblem gap (chi estimate).
    if (options.estimate_chi && t % options.chi_sample_stride == 0) {
      RateProblemOptions genie_opts = rp_options;
      genie_opts.include_delay_rows = false;
      const RateProblem genie_problem =
          build_rate_problem(model, qs, split, realizations, channel, urllc, genie_opts);
      const ScaResult genie_alloc = sca_solve(genie_problem, sca_options);
      if (!alloc.objective_trace.empty() && !genie_alloc.objective_trace.empty()) {
        chi_acc += std::max(genie_alloc.objective_trace.back() - alloc.objective_trace.back(), 0.0);
        ++chi_samples;
      }
    }

    // --- arrivals ---
    std::vector<double> arrivals(n_flows);
    for (int f = 0; f < n_flows; ++f)
      arrivals[f] = draw_arrivals_bits(model.flows[f], slot_s, arrival_rng[f]);

    // --- apply service: store-and-forward from start-of-slot queues ---
    // Transfers are computed before any queue is updated (Eqs. hold jointly).
    std::vector<std::vector<double>> served(n_flows, std::vector<double>(n_nodes, 0.0));
    std::vector<std::vector<double>> incoming(n_flows, std::vector<double>(n_nodes, 0.0));
    std::vector<double> x_norm(n_flows, 0.0);
    double psi_slot = 0.0;

    for (int f = 0; f < n_flows; ++f) {
      x_norm[f] = std::min(alloc.x_bits[f] / cap_bits[f], 1.0);
      psi_slot += 0.5 * (phi[f] - x_norm[f]) * (phi[f] - x_norm[f]);

      // MBS egress over this flow's first hops present in the problem.
      double first_cap = 0.0;
      for (size_t l = 0; l < problem.links.size(); ++l) {
        const auto& lv = problem.links[l];
        if (lv.flow == f && lv.from == model.mbs_id() &&
            model.flows[f].paths[lv.path].hops[1] == lv.to)
          first_cap += alloc.link_rate_bits[l];
      }
      const double mbs_actual = std::min(qs.q[f][mbs_idx], first_cap);
      served[f][mbs_idx] += mbs_actual;
      double lambda_norm = arrivals[f] / cap_bits[f];
      double first_norm = 0.0;

      for (size_t l = 0; l < problem.links.size(); ++l) {
        const auto& lv = problem.links[l];
        if (lv.flow != f) continue;
        const int to_idx = model.node_index.at(lv.to);
        const int from_idx = model.node_index.at(lv.from);
        double actual = 0.0;
        if (lv.from == model.mbs_id() && model.flows[f].paths[lv.path].hops[1] == lv.to) {
          actual = first_cap > 0.0 ? mbs_actual * alloc.link_rate_bits[l] / first_cap : 0.0;
          first_norm += alloc.link_rate_bits[l] / cap_bits[f];
        } else {
          actual = std::min(qs.q[f][from_idx], alloc.link_rate_bits[l]);
          served[f][from_idx] += actual;
        }
        incoming[f][to_idx] += actual;
      }
      psi_slot += 0.5 * (lambda_norm - first_norm) * (lambda_norm - first_norm);

      // Relay in/out quadratic drift terms, on allocated rates.
      for (size_t l = 0; l < problem.links.size(); ++l) {
        const auto& lv = problem.links[l];
        if (lv.flow != f || lv.from == model.mbs_id()) continue;
        double in_rate = 0.0;
        for (size_t l2 = 0; l2 < problem.links.size(); ++l2)
          if (problem.links[l2].flow == f && problem.links[l2].to == lv.from)
            in_rate = alloc.link_rate_bits[l2];
        const double d = (in_rate - alloc.link_rate_bits[l]) / cap_bits[f];
        psi_slot += 0.5 * d * d;
      }
    }
    sum.psi_estimate = std::max(sum.psi_estimate, psi_slot);

    // Queue updates and history bookkeeping.
    for (int f = 0; f < n_flows; ++f) {
      for (int n = 0; n < n_nodes; ++n) {
        const auto kind = model.nodes[n].kind;
        if (kind == NodeKind::Ue) {
          delivered_bits[f] += incoming[f][n];
          continue;
        }
        if (n == mbs_idx)
          qs.q[f][n] = step_mbs_queue(qs.q[f][n], served[f][n], arrivals[f]);
        else
          qs.q[f][n] = step_relay_queue(qs.q[f][n], served[f][n], incoming[f][n]);
        qs.record_service(f, n, served[f][n], incoming[f][n]);
      }
      qs.y[f] = step_virtual_queue(qs.y[f], phi[f], x_norm[f]);
    }
    qs.slot = t + 1;

    // --- window statistics for the learner ---
    for (int f = 0; f < n_flows; ++f) {
      auto& w = window[f];
      ++w.slots;
      for (int n = 0; n < n_nodes; ++n) w.q_sum[n] += qs.q[f][n];
      for (size_t l = 0; l < problem.links.size(); ++l) {
        const auto& lv = problem.links[l];
        if (lv.flow != f) continue;
        const auto& hops = model.flows[f].paths[lv.path].hops;
        if (lv.from == model.mbs_id() && hops[1] == lv.to) {
          w.first_rate_sum[lv.path] += alloc.link_rate_bits[l];
          if (hops.size() > 2) w.relay_in_sum[lv.path][0] += alloc.link_rate_bits[l];
        } else {
          for (size_t h = 1; h + 1 < hops.size(); ++h) {
            if (hops[h] != lv.from) continue;
            w.relay_out_sum[lv.path][h - 1] += alloc.link_rate_bits[l];
            if (h + 2 < hops.size()) w.relay_in_sum[lv.path][h] += alloc.link_rate_bits[l];
            break;
          }
        }
      }
    }

    // --- per-slot metrics and bound checks ---
    const bool post_warmup = t >= sum.warmup_slots;
    if (post_warmup) ++post_warmup_slots;
    double total_queue_units = 0.0;
    for (int f = 0; f < n_flows; ++f) {
      const double u_phi = std::log1p(phi[f]);
      const double u_x = std::log1p(x_norm[f]);
      if (post_warmup) {
        utility_phi_acc += u_phi;
        utility_x_acc += u_x;
        mbs_q_sum[f] += qs.q[f][mbs_idx];
      }
      total_queue_units += qs.y[f];
      sum.max_y = std::max(sum.max_y, qs.y[f]);
      if (qs.y[f] > q_cap_bound + 1e-9) ++sum.y_bound_violations;

      for (int n = 0; n < n_nodes; ++n) {
        if (model.nodes[n].kind == NodeKind::Ue) continue;
        const double q_units = qs.q[f][n] / cap_bits[f];
        total_queue_units += q_units;
        sum.max_q_cap_units = std::max(sum.max_q_cap_units, q_units);
        if (q_units > q_cap_bound + 1e-9) ++sum.q_bound_violations;
      }

      // One-hop delay samples: nodes carrying this flow's traffic this slot.
      for (int n = 0; n < n_nodes; ++n) {
        if (model.nodes[n].kind == NodeKind::Ue) continue;
        bool active = n == mbs_idx;
        if (!active)
          for (size_t p = 0; p < model.flows[f].paths.size() && !active; ++p)
            if (split[f][p]) {
              const auto& hops = model.flows[f].paths[p].hops;
              active = std::find(hops.begin() + 1, hops.end() - 1, model.nodes[n].id) !=
                       hops.end() - 1;
            }
        if (!active && qs.q[f][n] <= 0.0) continue;
        const double delay =
            arrival_bits_mean[f] > 0.0 ? qs.q[f][n] / arrival_bits_mean[f] * slot_s : 0.0;
        if (post_warmup) {
          sum.delay_samples_s.push_back(float(delay));
          auto& acc = delay_acc[{f, model.nodes[n].id}];
          acc.first += delay;
          ++acc.second;
        }
        if (options.keep_trace)
          out.trace.queues.push_back({t, f, model.nodes[n].id, qs.q[f][n], qs.y[f]});
      }
    }
    if (post_warmup) total_queue_acc += total_queue_units;

    if (options.keep_trace) {
      for (size_t l = 0; l < problem.links.size(); ++l) {
        const auto& lv = problem.links[l];
        double slack_bits = 0.0;
        // Attribute relay-row violations to the row's out link.
        size_t row_idx = 0;
        for (const auto& fp : problem.flows) {
          for (const auto& pa : fp.paths)
            for (const auto& hop : pa.relays) {
              if (hop.row_active) {
                if (hop.out_link == int(l) && row_idx < alloc.slack_nats.size())
                  slack_bits = alloc.slack_nats[row_idx] * problem.nats_to_bits;
                ++row_idx;
              }
            }
        }
        out.trace.allocs.push_back({t, model.flows[lv.flow].id, lv.from, lv.to,
                                    alloc.link_power_w[l], alloc.link_rate_bits[l], slack_bits});
      }
    }
  }

  // --- finalize ---
  const double horizon_s = double(options.slots) * slot_s;
  sum.throughput_bps.resize(n_flows);
  sum.avg_mbs_queue_bits.resize(n_flows);
  for (int f = 0; f < n_flows; ++f) {
    sum.throughput_bps[f] = delivered_bits[f] / horizon_s;
    sum.avg_mbs_queue_bits[f] = mbs_q_sum[f] / std::max(post_warmup_slots, 1L);
  }
  for (const auto& [key, acc] : delay_acc)
    sum.avg_one_hop_delay_s[key] = acc.first / std::max(acc.second, 1L);
  if (!sum.delay_samples_s.empty()) {
    double mean = 0.0;
    long viol = 0;
    for (float d : sum.delay_samples_s) {
      mean += d;
      if (d > urllc.delay_bound_s) ++viol;
    }
    sum.mean_one_hop_delay_s = mean / double(sum.delay_samples_s.size());
    sum.violation_prob = double(viol) / double(sum.delay_samples_s.size());
    sum.tail_resolution = 1.0 / double(sum.delay_samples_s.size());
  }
  if (!sum.sca_iterations.empty()) {
    std::vector<int> iters = sum.sca_iterations;
    std::nth_element(iters.begin(), iters.begin() + long(0.9 * (iters.size() - 1)), iters.end());
    sum.sca_p90 = iters[long(0.9 * (iters.size() - 1))];
  }
  sum.utility_phi_avg = utility_phi_acc / std::max(post_warmup_slots, 1L);
  sum.utility_x_avg = utility_x_acc / std::max(post_warmup_slots, 1L);
  sum.avg_total_queue_units = total_queue_acc / std::max(post_warmup_slots, 1L);
  sum.chi_estimate = chi_samples > 0 ? chi_acc / double(chi_samples) : 0.0;

  // First window after which strategy steps stay below 1e-3 for 20 windows.
  const int sustain = 20;
  for (size_t w = 0; w + sustain <= l1_by_window.size(); ++w) {
    bool ok = true;
    for (int k = 0; k < sustain && ok; ++k) ok = l1_by_window[w + k] < 1e-3;
    if (ok) {
      sum.learner_converged_window = long(w) + 1;
      break;
    }
  }

  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

EpisodeResult run_episode(const ScenarioConfig& config, const EpisodeOptions& options) {
  const NetworkModel model = build_network(config);
  return run_episode(model, config.channel, config.urllc, config.scheduler, options);
}

RunSummary run_genie(const ScenarioConfig& config, const EpisodeOptions& options) {
  ScenarioConfig genie = config;
  genie.scheduler.scheme = Scheme::Baseline1;  // learning on, no delay rows
  genie.scheduler.nu = 1e6;
  EpisodeOptions gopt = options;
  gopt.estimate_chi = false;
  auto result = run_episode(genie, gopt);
  result.summary.scheme = "Genie";
  return result.summary;
}

}  // namespace mmh
