#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mmh/config.hpp"
#include "mmh/rate_alloc.hpp"

using namespace mmh;

namespace {

// Minimal subproblems in nats (nats_to_bits = 1) for oracle comparisons.
RateProblem single_link(double gain, double p_max, double cap_nats, double weight) {
  RateProblem P;
  P.nats_to_bits = 1.0;
  P.links = {{0, 1, 0, 0, gain}};
  P.link_service_weight = {0.0};
  RateProblem::PathAlloc pa;
  pa.path = 0;
  pa.first_hop_link = 0;
  RateProblem::FlowProblem f;
  f.flow = 0;
  f.weight = weight;
  f.cap_nats = cap_nats;
  f.paths = {pa};
  P.flows = {f};
  P.budgets = {{0, p_max, {0}}};
  return P;
}

RateProblem two_hop(double delay_nats, double g0, double g1, double p0_max, double p1_max,
                    double cap_nats, double weight) {
  RateProblem P;
  P.nats_to_bits = 1.0;
  P.links = {{0, 1, 0, 0, g0}, {1, 2, 0, 0, g1}};
  P.link_service_weight = {0.0, 0.0};
  RateProblem::RelayHop hop;
  hop.node = 1;
  hop.in_link = 0;
  hop.out_link = 1;
  hop.delay_nats = delay_nats;
  hop.row_active = true;
  RateProblem::PathAlloc pa;
  pa.path = 0;
  pa.first_hop_link = 0;
  pa.relays = {hop};
  RateProblem::FlowProblem f;
  f.flow = 0;
  f.weight = weight;
  f.cap_nats = cap_nats;
  f.paths = {pa};
  P.flows = {f};
  P.budgets = {{0, p0_max, {0}}, {1, p1_max, {1}}};
  return P;
}

// Evaluates the linearized left side A y - C (1 + g p) from the returned row.
double lin_lhs(const LinearRow& row, int y_var, int p_var, double delay_nats, double y, double p) {
  const double c = -row.b - std::exp(delay_nats);
  double lhs = -row.a(y_var) * y - c;
  if (p_var >= 0) lhs -= row.a(p_var) * p;
  return lhs;
}

}  // namespace

TEST_CASE("SOC row is tight exactly at y = sqrt(1 + p g)") {
  const double g = 2.5;
  const auto reform = soc_reformulate(g, 0.3, 0, 1, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(0.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const double p = unif(rng);
    Eigen::VectorXd v(2);
    v << std::sqrt(1.0 + p * g), p;
    const double lhs = (reform.soc.A * v + reform.soc.c).norm();
    const double rhs = reform.soc.d.dot(v) + reform.soc.e;
    // (2 + pg)/2 == ||(y, pg/2)|| iff y^2 == 1 + pg
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    // And strictly feasible for any smaller y.
    v(0) *= 0.9;
    CHECK((reform.soc.A * v + reform.soc.c).norm() < rhs);
  }
}

TEST_CASE("zero outgoing power blocks any positive service requirement") {
  // With p_out = 0 the SOC row caps y at 1, so y^2/(1+p_in g_in) < 1 <= e^D:
  // the pair is infeasible exactly when D > 0 and the relay still gets input.
  const double g_in = 3.0;
  for (double p_in : {0.1, 1.0, 5.0}) {
    const double best_ratio = quad_over_affine(1.0, p_in, g_in);
    CHECK(best_ratio < 1.0);
    CHECK(best_ratio < std::exp(0.2));  // any D > 0 fails
  }
}

TEST_CASE("linearization is tight at the expansion point") {
  // 1 + p g = 4 with y_l = 2: surrogate at the expansion equals y^2/(1+pg) = 1.
  const double g = 1.0, p_l = 3.0, y_l = 2.0, d = 0.3;
  const auto row = linearize_qoa(y_l, p_l, g, d, 0, 1, 2);
  CHECK(lin_lhs(row, 0, 1, d, y_l, p_l) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin_lhs(row, 0, 1, d, y_l, p_l) ==
        doctest::Approx(quad_over_affine(y_l, p_l, g)).epsilon(1e-9));
  CHECK_THROWS_AS(linearize_qoa(0.0, 1.0, g, d, 0, 1, 2), Error);
}

TEST_CASE("linearization under-estimates the quad-over-affine everywhere") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double g = 0.1 + 5.0 * unif(rng);
    const double y_l = 0.1 + 5.0 * unif(rng);
    const double p_l = 5.0 * unif(rng);
    const double y = 6.0 * unif(rng);
    const double p = 6.0 * unif(rng);
    const auto row = linearize_qoa(y_l, p_l, g, 0.0, 0, 1, 2);
    const double surrogate = lin_lhs(row, 0, 1, 0.0, y, p);
    CHECK(surrogate <= quad_over_affine(y, p, g) + 1e-9);
  }
}

TEST_CASE("single-link allocation saturates power or the rate cap") {
  SUBCASE("budget-limited") {
    const double g = 50.0, pmax = 2.0;
    auto P = single_link(g, pmax, 30.0, 4.0);
    const auto res = sca_solve(P);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.x_bits[0] == doctest::Approx(std::log1p(g * pmax)).epsilon(1e-3));
  }
  SUBCASE("cap-limited") {
    const double g = 50.0, pmax = 2.0;
    auto P = single_link(g, pmax, 1.5, 4.0);
    const auto res = sca_solve(P);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.x_bits[0] == doctest::Approx(1.5).epsilon(1e-3));
  }
}

TEST_CASE("two symmetric flows split the shared budget equally") {
  RateProblem P;
  P.nats_to_bits = 1.0;
  P.links = {{0, 1, 0, 0, 10.0}, {0, 2, 1, 0, 10.0}};
  P.link_service_weight = {0.0, 0.0};
  for (int f = 0; f < 2; ++f) {
    RateProblem::PathAlloc pa;
    pa.path = 0;
    pa.first_hop_link = f;
    RateProblem::FlowProblem fp;
    fp.flow = f;
    fp.weight = 3.0;
    fp.cap_nats = 50.0;
    fp.paths = {pa};
    P.flows.push_back(fp);
  }
  P.budgets = {{0, 4.0, {0, 1}}};
  const auto res = sca_solve(P);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.link_power_w[0] == doctest::Approx(res.link_power_w[1]).epsilon(1e-4));
  CHECK(res.x_bits[0] == doctest::Approx(res.x_bits[1]).epsilon(1e-4));
  // Symmetric analytic optimum: both links at half the budget.
  CHECK(res.x_bits[0] == doctest::Approx(std::log1p(10.0 * 2.0)).epsilon(1e-3));
}

TEST_CASE("two-hop chain matches a dense grid-search oracle") {
  const double g0 = 8.0, g1 = 5.0, p0_max = 3.0, p1_max = 2.0;
  const double d_nats = 0.8;
  const double weight = 2.0, cap = 50.0;
  auto P = two_hop(d_nats, g0, g1, p0_max, p1_max, cap, weight);
  const auto res = sca_solve(P);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.total_slack_nats == doctest::Approx(0.0).epsilon(1e-9));

  // Brute force over (p0, p1): x = ln(1+g0 p0) subject to the ratio row.
  double best = -1e300;
  const int n = 1000;
  for (int i = 0; i <= n; ++i) {
    const double p0 = p0_max * double(i) / n;
    for (int j = 0; j <= n; ++j) {
      const double p1 = p1_max * double(j) / n;
      if (std::log1p(g1 * p1) - std::log1p(g0 * p0) < d_nats) continue;
      best = std::max(best, weight * std::min(std::log1p(g0 * p0), cap));
    }
  }
  const double got = weight * res.x_bits[0];
  CHECK(std::abs(got - best) <= 1e-3 * std::max(1.0, std::abs(got)));
}

TEST_CASE("SCA objective trace is nondecreasing on random chains") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    auto P = two_hop(-1.0 + 3.0 * unif(rng), 1.0 + 9.0 * unif(rng), 1.0 + 9.0 * unif(rng),
                     0.5 + 3.0 * unif(rng), 0.5 + 3.0 * unif(rng), 40.0, 1.0 + 4.0 * unif(rng));
    const auto res = sca_solve(P);
    if (res.status == SolveStatus::Infeasible) continue;
    for (size_t k = 1; k < res.objective_trace.size(); ++k)
      CHECK(res.objective_trace[k] >= res.objective_trace[k - 1] - 1e-9);
  }
}

TEST_CASE("returned point satisfies the original constraints when unslacked") {
  auto P = two_hop(0.5, 8.0, 6.0, 3.0, 2.0, 50.0, 2.0);
  const auto res = sca_solve(P);
  REQUIRE(res.status == SolveStatus::Optimal);
  REQUIRE(res.total_slack_nats == 0.0);
  const double out_nats = std::log1p(6.0 * res.link_power_w[1]);
  const double in_nats = std::log1p(8.0 * res.link_power_w[0]);
  CHECK(out_nats - in_nats >= 0.5 - 1e-6);                        // ratio row
  CHECK(res.x_bits[0] <= in_nats + 1e-6);                         // rate coupling
  CHECK(res.link_power_w[0] <= 3.0 + 1e-9);                       // budgets
  CHECK(res.link_power_w[1] <= 2.0 + 1e-9);
  CHECK(res.x_bits[0] <= 50.0 + 1e-9);                            // cap
}

TEST_CASE("feasibility restoration") {
  SUBCASE("infeasible requirement yields slack equal to the gap") {
    // Drain-only relay: ln(1+g1 p1) >= D with D beyond the achievable rate.
    const double g1 = 5.0, p1_max = 2.0;
    const double achievable = std::log1p(g1 * p1_max);
    const double d_nats = achievable + 2.0;
    RateProblem P;
    P.nats_to_bits = 1.0;
    P.links = {{1, 2, 0, 0, g1}};
    P.link_service_weight = {0.0};
    RateProblem::RelayHop hop;
    hop.node = 1;
    hop.in_link = -1;
    hop.out_link = 0;
    hop.delay_nats = d_nats;
    hop.row_active = true;
    RateProblem::PathAlloc pa;
    pa.path = 0;
    pa.first_hop_link = -1;
    pa.relays = {hop};
    RateProblem::FlowProblem f;
    f.flow = 0;
    f.weight = 1.0;
    f.cap_nats = 10.0;
    f.paths = {pa};
    P.flows = {f};
    P.budgets = {{1, p1_max, {0}}};

    const auto res = sca_solve(P);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.used_restore);
    REQUIRE(!res.slack_nats.empty());
    CHECK(res.slack_nats[0] == doctest::Approx(2.0).epsilon(1e-3));
  }

  SUBCASE("feasible problem: slacks stay zero and the solution is unchanged") {
    auto P = two_hop(0.5, 8.0, 6.0, 3.0, 2.0, 50.0, 2.0);
    const auto plain = sca_solve(P);
    ScaOptions opts;
    opts.always_slack = true;
    const auto slacked = sca_solve(P, opts);
    REQUIRE(plain.status == SolveStatus::Optimal);
    REQUIRE(slacked.status == SolveStatus::Optimal);
    CHECK(slacked.total_slack_nats <= 1e-6);
    CHECK(slacked.x_bits[0] == doctest::Approx(plain.x_bits[0]).epsilon(1e-2));
  }

  SUBCASE("solution is insensitive to the penalty weight once large") {
    auto P = two_hop(1.2, 8.0, 2.0, 3.0, 0.4, 50.0, 2.0);  // tight but solvable either way
    ScaOptions w1, w2;
    w1.always_slack = w2.always_slack = true;
    w1.slack_weight_factor = 1e5;
    w2.slack_weight_factor = 1e7;
    const auto a = sca_solve(P, w1);
    const auto b = sca_solve(P, w2);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(a.x_bits[0] == doctest::Approx(b.x_bits[0]).epsilon(1e-3));
    CHECK(a.total_slack_nats == doctest::Approx(b.total_slack_nats).epsilon(1e-3));
  }
}

TEST_CASE("build_rate_problem structure") {
  const auto cfg = default_scenario();
  const auto model = build_network(cfg);
  QueueState qs(2, int(model.nodes.size()));
  std::vector<std::vector<char>> split = {{1, 1, 0, 0}, {1, 1, 0, 0}};

  // Deterministic ideal channel realizations for every declared link.
  std::vector<LinkRealization> reals;
  for (const auto& l : model.links) {
    LinkRealization r;
    r.from = l.from;
    r.to = l.to;
    r.effective_gain = db_to_linear(-path_loss_db(l.distance_m, LinkState::Los)) * 6.25 * 4.75;
    reals.push_back(r);
  }

  RateProblemOptions opts;
  const auto P = build_rate_problem(model, qs, split, reals, cfg.channel, cfg.urllc, opts);
  CHECK(P.flows.size() == 2);
  // Two selected 3-hop paths per flow: 6 links each.
  CHECK(P.links.size() == 12);
  // Shared MBS budget row covers all first hops of both flows.
  bool found_mbs_budget = false;
  for (const auto& b : P.budgets)
    if (b.node == 0) {
      found_mbs_budget = true;
      CHECK(b.links.size() == 4);
    }
  CHECK(found_mbs_budget);
  // Empty history: all relay delay terms carry the negative headroom.
  for (const auto& f : P.flows)
    for (const auto& pa : f.paths)
      for (const auto& hop : pa.relays) {
        CHECK(hop.delay_nats < 0.0);
        CHECK(hop.row_active);  // always-on default
      }

  SUBCASE("inactive relay rows are dropped when not always-on") {
    RateProblemOptions lazy = opts;
    lazy.relay_rows_always_on = false;
    const auto Q = build_rate_problem(model, qs, split, reals, cfg.channel, cfg.urllc, lazy);
    for (const auto& f : Q.flows)
      for (const auto& pa : f.paths)
        for (const auto& hop : pa.relays) CHECK_FALSE(hop.row_active);
  }

  SUBCASE("no delay rows at all for the unconstrained schemes") {
    RateProblemOptions off = opts;
    off.include_delay_rows = false;
    const auto Q = build_rate_problem(model, qs, split, reals, cfg.channel, cfg.urllc, off);
    for (const auto& f : Q.flows) {
      CHECK_FALSE(f.mbs_row);
      for (const auto& pa : f.paths)
        for (const auto& hop : pa.relays) CHECK_FALSE(hop.row_active);
    }
  }

  SUBCASE("empty split is rejected") {
    std::vector<std::vector<char>> none = {{0, 0, 0, 0}, {1, 0, 0, 0}};
    CHECK_THROWS_AS(build_rate_problem(model, qs, none, reals, cfg.channel, cfg.urllc, opts),
                    Error);
  }
}
