#include "mmh/rate_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mmh {

double quad_over_affine(double y, double p, double gain) {
  return y * y / (1.0 + gain * p);
}

SocReformulation soc_reformulate(double gain_out, double delay_nats, int y_var, int p_out_var,
                                 int n_vars) {
  // (2 + p g)/2 >= ||(y, p g / 2)||  <=>  1 + p g >= y^2 (with 1 + pg/2 > 0)
  SocReformulation out;
  out.soc.A = Eigen::MatrixXd::Zero(2, n_vars);
  out.soc.A(0, y_var) = 1.0;
  out.soc.A(1, p_out_var) = gain_out / 2.0;
  out.soc.c = Eigen::VectorXd::Zero(2);
  out.soc.d = Eigen::VectorXd::Zero(n_vars);
  out.soc.d(p_out_var) = gain_out / 2.0;
  out.soc.e = 1.0;
  out.qoa_rhs = std::exp(delay_nats);
  return out;
}

LinearRow linearize_qoa(double y_l, double p_in_l, double gain_in, double delay_nats, int y_var,
                        int p_in_var, int n_vars) {
  if (!(y_l > 0.0)) throw Error(Errc::BadConfig, "linearization needs y_l > 0");
  if (p_in_l < 0.0) throw Error(Errc::BadConfig, "linearization needs p_in_l >= 0");
  const double denom = 1.0 + gain_in * p_in_l;
  const double a_y = 2.0 * y_l / denom;
  const double c = y_l * y_l / (denom * denom);
  // a_y * y - c * (1 + g p) >= e^D   as a <= row
  LinearRow row;
  row.a = Eigen::VectorXd::Zero(n_vars);
  row.a(y_var) = -a_y;
  if (p_in_var >= 0) row.a(p_in_var) = c * gain_in;
  row.b = -std::exp(delay_nats) - c;
  return row;
}

RateProblem feasibility_restore(const RateProblem& problem) {
  RateProblem relaxed = problem;
  relaxed.slack_delay_rows = true;
  return relaxed;
}

namespace {

constexpr double kDelayNatsCap = 25.0;   // beyond any achievable rate; keeps e^D representable
constexpr double kWeightFloor = 1e-3;    // keeps power allocation driven when Y = 0

struct Layout {
  std::vector<int> x;        // per flow
  std::vector<int> p;        // per link
  std::vector<int> r;        // per link, -1 when absent
  std::vector<int> y;        // per relay row, -1 in slack mode
  std::vector<int> s_relay;  // per relay row, -1 unless slack mode
  std::vector<int> s_mbs;    // per flow, -1 unless slacked row present
  struct RowRef {
    int flow, path, hop;  // indices into problem.flows[...].paths[...].relays[...]
  };
  std::vector<RowRef> rows;
  ConicProgram base;  // variables and bounds only; rows are per-iterate
};

struct Expansion {
  std::vector<double> y_l;     // per relay row
  std::vector<double> p_in_l;  // per relay row
};

double node_power_of_link(const RateProblem& P, int link) {
  for (const auto& b : P.budgets)
    for (int l : b.links)
      if (l == link) return b.max_power_w;
  return 1.0;
}

Layout make_layout(const RateProblem& P) {
  Layout L;
  ConicProgram& prog = L.base;
  L.p.assign(P.links.size(), -1);
  L.r.assign(P.links.size(), -1);

  for (const auto& f : P.flows) {
    if (f.cap_nats <= 0.0) throw Error(Errc::BadConfig, "flow cap must be positive");
    L.x.push_back(prog.add_var("x_f" + std::to_string(f.flow), 0.0, f.cap_nats));
  }
  for (size_t l = 0; l < P.links.size(); ++l) {
    const double pmax = node_power_of_link(P, int(l));
    L.p[l] = prog.add_var("p_" + std::to_string(P.links[l].from) + "_" +
                              std::to_string(P.links[l].to) + "_f" +
                              std::to_string(P.links[l].flow),
                          0.0, pmax);
  }
  auto ensure_rate_var = [&](int l) {
    if (L.r[l] >= 0) return;
    const double hi = std::log1p(P.links[l].gain * node_power_of_link(P, l)) + 1.0;
    L.r[l] = prog.add_var("r_" + std::to_string(P.links[l].from) + "_" +
                              std::to_string(P.links[l].to) + "_f" +
                              std::to_string(P.links[l].flow),
                          0.0, hi);
  };
  for (size_t l = 0; l < P.links.size(); ++l)
    if (P.link_service_weight[l] > 0.0) ensure_rate_var(int(l));
  for (const auto& f : P.flows)
    for (const auto& path : f.paths)
      if (path.first_hop_link >= 0) ensure_rate_var(path.first_hop_link);

  for (size_t fi = 0; fi < P.flows.size(); ++fi) {
    const auto& f = P.flows[fi];
    for (size_t pi = 0; pi < f.paths.size(); ++pi) {
      const auto& path = f.paths[pi];
      for (size_t hi = 0; hi < path.relays.size(); ++hi) {
        if (!path.relays[hi].row_active) continue;
        L.rows.push_back({int(fi), int(pi), int(hi)});
      }
    }
  }

  L.y.assign(L.rows.size(), -1);
  L.s_relay.assign(L.rows.size(), -1);
  L.s_mbs.assign(P.flows.size(), -1);
  for (size_t k = 0; k < L.rows.size(); ++k) {
    const auto& ref = L.rows[k];
    const auto& hop = P.flows[ref.flow].paths[ref.path].relays[ref.hop];
    if (!P.slack_delay_rows) {
      const double ymax =
          std::sqrt(1.0 + P.links[hop.out_link].gain * node_power_of_link(P, hop.out_link)) + 1.0;
      L.y[k] = prog.add_var("y_row" + std::to_string(k), 0.0, ymax);
    } else {
      ensure_rate_var(hop.out_link);
      L.s_relay[k] = prog.add_var("s_row" + std::to_string(k), 0.0,
                                  std::max(hop.delay_nats, 0.0) + 60.0);
    }
  }
  if (P.slack_delay_rows) {
    for (size_t fi = 0; fi < P.flows.size(); ++fi)
      if (P.flows[fi].mbs_row)
        L.s_mbs[fi] = prog.add_var("s_mbs_f" + std::to_string(P.flows[fi].flow), 0.0,
                                   std::max(P.flows[fi].mbs_delay_nats, 0.0) + 60.0);
  }
  return L;
}

ConicProgram build_surrogate(const RateProblem& P, const Layout& L, const Expansion& E,
                             double slack_weight) {
  ConicProgram prog = L.base;
  const int n = prog.n_vars();

  // Objective: admitted rates, weighted link service, slack penalty.
  for (size_t fi = 0; fi < P.flows.size(); ++fi)
    prog.objective(L.x[fi]) = std::max(P.flows[fi].weight, kWeightFloor);
  for (size_t l = 0; l < P.links.size(); ++l)
    if (P.link_service_weight[l] > 0.0) prog.objective(L.r[l]) += P.link_service_weight[l];
  for (int s : L.s_relay)
    if (s >= 0) prog.objective(s) = -slack_weight;
  for (int s : L.s_mbs)
    if (s >= 0) prog.objective(s) = -slack_weight;

  // Rate definitions r <= ln(1 + g p).
  for (size_t l = 0; l < P.links.size(); ++l)
    if (L.r[l] >= 0) prog.lograte.push_back({L.r[l], L.p[l], 1.0, P.links[l].gain, -1});

  // Power budgets.
  for (const auto& b : P.budgets) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (int l : b.links) a(L.p[l]) = 1.0;
    prog.add_linear(a, b.max_power_w);
  }

  // Admitted rate coupling and MBS service floors.
  for (size_t fi = 0; fi < P.flows.size(); ++fi) {
    const auto& f = P.flows[fi];
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a(L.x[fi]) = 1.0;
    bool any = false;
    for (const auto& path : f.paths)
      if (path.first_hop_link >= 0) {
        a(L.r[path.first_hop_link]) = -1.0;
        any = true;
      }
    if (any) prog.add_linear(a, 0.0);
    // else: no sending paths; x stays bounded by its cap (degenerate but legal)

    if (f.mbs_row) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
      for (const auto& path : f.paths)
        if (path.first_hop_link >= 0) m(L.r[path.first_hop_link]) = -1.0;
      if (L.s_mbs[fi] >= 0) m(L.s_mbs[fi]) = -1.0;
      prog.add_linear(m, -std::min(f.mbs_delay_nats, kDelayNatsCap));
    }
  }

  // Relay ratio rows.
  for (size_t k = 0; k < L.rows.size(); ++k) {
    const auto& ref = L.rows[k];
    const auto& hop = P.flows[ref.flow].paths[ref.path].relays[ref.hop];
    const double d_nats = std::min(hop.delay_nats, kDelayNatsCap);
    const double g_in = hop.in_link >= 0 ? P.links[hop.in_link].gain : 0.0;
    const int p_in = hop.in_link >= 0 ? L.p[hop.in_link] : -1;

    if (!P.slack_delay_rows) {
      const double g_out = P.links[hop.out_link].gain;
      auto reform = soc_reformulate(g_out, d_nats, L.y[k], L.p[hop.out_link], n);
      prog.soc.push_back(std::move(reform.soc));
      LinearRow lin = linearize_qoa(E.y_l[k], E.p_in_l[k], g_in, d_nats, L.y[k], p_in, n);
      // Normalize by the constraint scale so the Newton system stays balanced.
      const double scale = 1.0 / std::max(1.0, std::exp(d_nats));
      lin.a *= scale;
      lin.b *= scale;
      prog.linear.push_back(std::move(lin));
    } else {
      // Nats-domain surrogate: r_out + s >= D + tangent of ln(1 + g p_in).
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a(L.r[hop.out_link]) = -1.0;
      a(L.s_relay[k]) = -1.0;
      double rhs = -d_nats;
      if (p_in >= 0) {
        const double denom = 1.0 + g_in * E.p_in_l[k];
        a(p_in) = g_in / denom;
        rhs += -std::log(denom) + g_in * E.p_in_l[k] / denom;
      }
      prog.add_linear(a, rhs);
    }
  }
  return prog;
}

}  // namespace

ScaResult sca_solve(const RateProblem& problem, const ScaOptions& options) {
  // Restored problems re-enter through the same driver exactly once.
  const RateProblem* P = &problem;
  RateProblem restored;
  if (options.always_slack && !problem.slack_delay_rows) {
    restored = feasibility_restore(problem);
    P = &restored;
  }

  for (int round = 0; round < 2; ++round) {
    Layout L = make_layout(*P);

    Expansion E;
    E.y_l.assign(L.rows.size(), 1.0);
    E.p_in_l.assign(L.rows.size(), 0.0);
    {
      // Uniform power split per node as the initial expansion point.
      std::vector<double> p0(P->links.size(), 0.0);
      for (const auto& b : P->budgets)
        for (int l : b.links) p0[l] = b.max_power_w / double(b.links.size());
      for (size_t k = 0; k < L.rows.size(); ++k) {
        const auto& ref = L.rows[k];
        const auto& hop = P->flows[ref.flow].paths[ref.path].relays[ref.hop];
        E.p_in_l[k] = hop.in_link >= 0 ? p0[hop.in_link] : 0.0;
        E.y_l[k] = std::sqrt(1.0 + P->links[hop.out_link].gain * p0[hop.out_link]);
      }
    }

    double max_weight = kWeightFloor;
    for (const auto& f : P->flows) max_weight = std::max(max_weight, f.weight);
    const double slack_weight = options.slack_weight_factor * max_weight;

    ScaResult result;
    result.used_restore = P->slack_delay_rows && !problem.slack_delay_rows;
    Eigen::VectorXd point;
    bool infeasible_start = false;
    bool converged = false;

    for (int iter = 0; iter < options.max_iter; ++iter) {
      ConicProgram prog = build_surrogate(*P, L, E, slack_weight);
      SolverOptions sopt = options.solver;
      if (point.size() == prog.n_vars()) sopt.warm_start = &point;
      Solution sol = solve(prog, sopt);

      if (sol.status == SolveStatus::Infeasible) {
        if (iter == 0 && !P->slack_delay_rows) {
          infeasible_start = true;
          break;
        }
        break;  // keep the last accepted iterate
      }
      if (!result.objective_trace.empty()) {
        const double prev = result.objective_trace.back();
        if (sol.objective < prev) {
          // Sub-precision dip at convergence; larger dips indicate a bug.
          if (prev - sol.objective > 1e-6 * (1.0 + std::abs(prev)))
            throw std::logic_error("SCA objective decreased beyond solver precision");
          result.rejected_dip = prev - sol.objective;
          converged = true;
          break;
        }
        if (sol.objective - prev <= options.tol) {
          point = sol.point;
          result.objective_trace.push_back(sol.objective);
          ++result.iterations;
          converged = true;
          break;
        }
      }
      point = sol.point;
      result.objective_trace.push_back(sol.objective);
      ++result.iterations;

      // Move the expansion point to the solution.
      for (size_t k = 0; k < L.rows.size(); ++k) {
        const auto& ref = L.rows[k];
        const auto& hop = P->flows[ref.flow].paths[ref.path].relays[ref.hop];
        if (L.y[k] >= 0) E.y_l[k] = std::max(point(L.y[k]), 1e-9);
        E.p_in_l[k] = hop.in_link >= 0 ? std::max(point(L.p[hop.in_link]), 0.0) : 0.0;
      }
    }

    if (infeasible_start) {
      restored = feasibility_restore(problem);
      P = &restored;
      continue;
    }

    if (point.size() == 0) {
      result.status = SolveStatus::Infeasible;
      return result;
    }
    result.status = converged || result.iterations < options.max_iter ? SolveStatus::Optimal
                                                                      : SolveStatus::IterLimit;

    result.x_bits.resize(P->flows.size());
    for (size_t fi = 0; fi < P->flows.size(); ++fi)
      result.x_bits[fi] = P->nats_to_bits * point(L.x[fi]);
    result.link_power_w.resize(P->links.size());
    result.link_rate_bits.resize(P->links.size());
    for (size_t l = 0; l < P->links.size(); ++l) {
      result.link_power_w[l] = std::max(point(L.p[l]), 0.0);
      result.link_rate_bits[l] =
          P->nats_to_bits * std::log1p(P->links[l].gain * result.link_power_w[l]);
    }
    // Honest violation telemetry: re-evaluate the original ratio constraints.
    result.slack_nats.assign(L.rows.size(), 0.0);
    for (size_t k = 0; k < L.rows.size(); ++k) {
      const auto& ref = L.rows[k];
      const auto& hop = P->flows[ref.flow].paths[ref.path].relays[ref.hop];
      const double out_nats =
          std::log1p(P->links[hop.out_link].gain * result.link_power_w[hop.out_link]);
      const double in_nats =
          hop.in_link >= 0
              ? std::log1p(P->links[hop.in_link].gain * result.link_power_w[hop.in_link])
              : 0.0;
      const double viol = std::min(hop.delay_nats, kDelayNatsCap) - (out_nats - in_nats);
      result.slack_nats[k] = viol > 1e-7 ? viol : 0.0;
      result.total_slack_nats += result.slack_nats[k];
    }
    for (size_t fi = 0; fi < P->flows.size(); ++fi) {
      if (!P->flows[fi].mbs_row) continue;
      double first_nats = 0.0;
      for (const auto& path : P->flows[fi].paths)
        if (path.first_hop_link >= 0)
          first_nats +=
              std::log1p(P->links[path.first_hop_link].gain *
                         result.link_power_w[path.first_hop_link]);
      const double viol = std::min(P->flows[fi].mbs_delay_nats, kDelayNatsCap) - first_nats;
      if (viol > 1e-7) {
        result.slack_nats.push_back(viol);
        result.total_slack_nats += viol;
      }
    }
    return result;
  }
  // Unreachable: the restored problem always admits an interior point.
  ScaResult result;
  result.status = SolveStatus::Infeasible;
  return result;
}

RateProblem build_rate_problem(const NetworkModel& model, const QueueState& queues,
                               const std::vector<std::vector<char>>& split,
                               const std::vector<LinkRealization>& realizations,
                               const ChannelParams& channel, const UrllcParams& urllc,
                               const RateProblemOptions& options) {
  RateProblem P;
  const double slot = model.slot_duration_s;
  P.nats_to_bits = channel.bandwidth_hz * slot / std::log(2.0);
  const double noise = channel.noise_power_w();

  std::map<std::pair<int, int>, const LinkRealization*> real_by_link;
  for (const auto& r : realizations) real_by_link[{r.from, r.to}] = &r;
  auto link_gain = [&](int from, int to) {
    auto it = real_by_link.find({from, to});
    if (it == real_by_link.end())
      throw Error(Errc::BadConfig, "missing channel realization for link " +
                                       std::to_string(from) + "->" + std::to_string(to));
    return std::max(it->second->effective_gain / noise, 1e-12);
  };

  std::map<int, std::vector<int>> node_links;  // node id -> link indices
  auto add_link = [&](int from, int to, int flow_idx, int path_idx) {
    const int idx = int(P.links.size());
    P.links.push_back({from, to, flow_idx, path_idx, link_gain(from, to)});
    P.link_service_weight.push_back(0.0);
    node_links[from].push_back(idx);
    return idx;
  };

  double weight_sum = 0.0;
  for (size_t fi = 0; fi < model.flows.size(); ++fi) {
    const auto& flow = model.flows[fi];
    const double cap_bits = flow.max_rate_bps * slot;
    const double arrival_bits = flow.mean_arrival_bps * slot;
    RateProblem::FlowProblem fp;
    fp.flow = int(fi);
    fp.cap_nats = cap_bits / P.nats_to_bits;
    fp.weight = std::max(queues.y[fi], 0.0) * P.nats_to_bits / cap_bits;
    weight_sum += fp.weight;

    bool any_selected = false;
    for (size_t pi = 0; pi < flow.paths.size(); ++pi) {
      const bool selected = pi < split[fi].size() && split[fi][pi];
      any_selected = any_selected || selected;
      const auto& hops = flow.paths[pi].hops;
      RateProblem::PathAlloc pa;
      pa.path = int(pi);

      // Wake the chain from the first node that must transmit this slot.
      int prev_link = -1;
      if (selected) {
        prev_link = add_link(hops[0], hops[1], int(fi), int(pi));
        pa.first_hop_link = prev_link;
      }
      for (size_t h = 1; h + 1 < hops.size(); ++h) {
        const int node = hops[h];
        const int node_idx = model.node_index.at(node);
        const double backlog = queues.q[fi][node_idx];
        const bool upstream_feeds = prev_link >= 0;
        const bool needs_drain = backlog > options.drain_queue_threshold_bits;
        if (!upstream_feeds && !needs_drain) continue;

        RateProblem::RelayHop hop;
        hop.node = node;
        hop.in_link = prev_link;
        hop.out_link = add_link(node, hops[h + 1], int(fi), int(pi));
        const double d_bits =
            delay_term_bits(queues, int(fi), node_idx, false, arrival_bits, urllc, slot);
        hop.delay_nats = d_bits / P.nats_to_bits;
        hop.row_active =
            options.include_delay_rows && (options.relay_rows_always_on || d_bits > 0.0);
        prev_link = hop.out_link;
        pa.relays.push_back(hop);
      }
      if (pa.first_hop_link >= 0 || !pa.relays.empty()) fp.paths.push_back(std::move(pa));
    }
    if (!any_selected) throw Error(Errc::EmptySplit, "flow has no selected paths");

    if (options.include_delay_rows && options.mbs_delay_row) {
      const int mbs_idx = model.node_index.at(model.mbs_id());
      const double d_bits =
          delay_term_bits(queues, int(fi), mbs_idx, true, arrival_bits, urllc, slot);
      if (d_bits > 0.0) {
        fp.mbs_row = true;
        fp.mbs_delay_nats = d_bits / P.nats_to_bits;
      }
    }
    P.flows.push_back(std::move(fp));
  }

  // Small drain bonus so leftover relay power empties backlogs.
  if (options.drain_bonus_weight > 0.0) {
    const double mean_weight =
        std::max(weight_sum / std::max<size_t>(model.flows.size(), 1), kWeightFloor);
    for (const auto& fp : P.flows)
      for (const auto& pa : fp.paths)
        for (const auto& hop : pa.relays)
          P.link_service_weight[hop.out_link] =
              std::max(P.link_service_weight[hop.out_link],
                       options.drain_bonus_weight * mean_weight);
  }

  for (const auto& [node, links] : node_links) {
    RateProblem::NodeBudget budget;
    budget.node = node;
    budget.max_power_w = model.node(node).max_power_w;
    budget.links = links;
    P.budgets.push_back(std::move(budget));
  }
  return P;
}

}  // namespace mmh
