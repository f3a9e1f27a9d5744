#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mmh/path_learning.hpp"

using namespace mmh;

TEST_CASE("Boltzmann-Gibbs distribution") {
  SUBCASE("equal regrets give the uniform distribution") {
    const auto p = bg_distribution({3.0, 3.0, 3.0, 3.0}, 5.0);
    for (double v : p) CHECK(v == doctest::Approx(0.25));
  }
  SUBCASE("kappa*ln 2 regret gap gives 2:1 odds") {
    const double kappa = 5.0;
    const auto p = bg_distribution({kappa * std::log(2.0), 0.0}, kappa);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("all non-positive regrets clamp to uniform") {
    const auto p = bg_distribution({-5.0, -1.0, 0.0}, 2.0);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("overflow-safe for huge regrets") {
    const auto p = bg_distribution({5000.0, 4000.0}, 1.0);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(std::isfinite(p[1]));
  }
  SUBCASE("shift invariance for positive regrets") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.1, 20.0);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> r = {unif(rng), unif(rng), unif(rng)};
      const double shift = unif(rng);
      std::vector<double> rs = r;
      for (auto& v : rs) v += shift;
      const auto a = bg_distribution(r, 5.0);
      const auto b = bg_distribution(rs, 5.0);
      for (size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
    }
  }
  SUBCASE("temperature limits") {
    const std::vector<double> r = {4.0, 1.0, 2.5};
    const auto hot = bg_distribution(r, 1e9);
    for (double v : hot) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    const auto cold = bg_distribution(r, 1e-6);
    CHECK(cold[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("regret-proportional map") {
  const auto p = regret_matching_distribution({3.0, 1.0, -2.0});
  CHECK(p[0] == doctest::Approx(0.75));
  CHECK(p[1] == doctest::Approx(0.25));
  CHECK(p[2] == doctest::Approx(0.0));
  const auto u = regret_matching_distribution({-1.0, -2.0});
  CHECK(u[0] == doctest::Approx(0.5));
}

TEST_CASE("learner update steps") {
  LearningSchedule sched;

  SUBCASE("full-rate utility step replaces the estimate on chosen paths") {
    FlowLearner st(2);
    // gamma(0) = 1 exactly for any exponent, so the estimate snaps to feedback
    update_learner(st, 10.0, {1, 0}, sched, 0);
    CHECK(st.u_hat[0] == doctest::Approx(10.0));
    CHECK(st.u_hat[1] == doctest::Approx(0.0));  // not chosen: indicator gates the update
  }

  SUBCASE("unit regret step tracks u_hat - feedback") {
    FlowLearner st(2);
    st.u_hat = {10.0, 0.0};
    st.regret_hat = {5.0, 5.0};
    // t=0 -> eta = 1: regret' = u_hat - feedback
    LearningSchedule s = sched;
    std::vector<char> chosen = {0, 0};
    update_learner(st, 10.0, chosen, s, 0);
    CHECK(st.regret_hat[0] == doctest::Approx(0.0));
    CHECK(st.regret_hat[1] == doctest::Approx(-10.0));
  }

  SUBCASE("strategy stays on the simplex through long update sequences") {
    FlowLearner st(4);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(-50.0, 50.0);
    std::uniform_int_distribution<int> which(0, 3);
    for (long t = 0; t < 20000; ++t) {
      std::vector<char> chosen(4, 0);
      chosen[which(rng)] = 1;
      chosen[which(rng)] = 1;
      update_learner(st, unif(rng), chosen, sched, t);
      double sum = std::accumulate(st.prob.begin(), st.prob.end(), 0.0);
      CHECK(std::abs(sum - 1.0) < 1e-9);
      for (double p : st.prob) CHECK(p >= 0.0);
    }
  }
}

TEST_CASE("argmax concentration at vanishing temperature") {
  FlowLearner st(3);
  st.regret_hat = {2.0, 7.0, 1.0};
  const auto p = bg_distribution(st.regret_hat, 1e-6);
  size_t argmax_pi = std::max_element(p.begin(), p.end()) - p.begin();
  size_t argmax_r = std::max_element(st.regret_hat.begin(), st.regret_hat.end()) -
                    st.regret_hat.begin();
  CHECK(argmax_pi == argmax_r);
}

TEST_CASE("schedule validation") {
  SUBCASE("the evaluation setting is valid") {
    LearningSchedule s;
    s.a_utility = 0.51;
    s.a_regret = 0.55;
    s.a_prob = 0.60;
    CHECK(validate_schedule(s).ok);
  }
  SUBCASE("slow utility exponent breaks the square-summability") {
    LearningSchedule s;
    s.a_utility = 0.40;
    const auto rep = validate_schedule(s);
    CHECK_FALSE(rep.ok);
    bool found = false;
    for (const auto& v : rep.violations) found = found || v.find("squared") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("wrong ordering breaks the timescale separation") {
    LearningSchedule s;
    s.a_utility = 0.55;
    s.a_regret = 0.51;
    const auto rep = validate_schedule(s);
    CHECK_FALSE(rep.ok);
    bool found = false;
    for (const auto& v : rep.violations) found = found || v.find("ratio") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("probability exponent above one") {
    LearningSchedule s;
    s.a_prob = 1.2;
    CHECK_FALSE(validate_schedule(s).ok);
  }
}

TEST_CASE("split sampling") {
  std::mt19937_64 rng(8);

  SUBCASE("degenerate distribution always picks its atom") {
    for (int i = 0; i < 100; ++i) {
      const auto s = sample_split({1.0, 0.0, 0.0, 0.0}, 1, rng);
      REQUIRE(s.size() == 1);
      CHECK(s[0] == 0);
    }
  }

  SUBCASE("uniform 2-of-4 selects each path half the time") {
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const auto s = sample_split({0.25, 0.25, 0.25, 0.25}, 2, rng);
      REQUIRE(s.size() == 2);
      CHECK(s[0] != s[1]);
      for (int m : s) ++counts[m];
    }
    for (int c : counts) CHECK(double(c) / n == doctest::Approx(0.5).epsilon(0.02));
  }

  SUBCASE("selecting all paths is deterministic") {
    const auto s = sample_split({0.7, 0.2, 0.1}, 3, rng);
    CHECK(s == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("per-path utility decomposition") {
  SUBCASE("all-zero queues give zero utilities") {
    PathFeedback fb;
    fb.mbs_queue = 0.0;
    fb.paths.resize(2);
    fb.paths[0].first_hop_rate = 0.9;
    fb.paths[0].relays = {{0.0, 0.5, 0.5}};
    fb.paths[1].first_hop_rate = 0.2;
    const auto u = path_utilities(fb);
    CHECK(u[0] == doctest::Approx(0.0));
    CHECK(u[1] == doctest::Approx(0.0));
  }
  SUBCASE("single balanced path: utility is queue times first-hop rate") {
    PathFeedback fb;
    fb.mbs_queue = 10.0;
    PathFeedback::Path p;
    p.first_hop_rate = 4.0;
    p.relays = {{3.0, 2.0, 2.0}};  // balanced relay contributes nothing
    fb.paths = {p};
    CHECK(path_utilities(fb)[0] == doctest::Approx(40.0));
  }
  SUBCASE("a congested relay drives its path utility negative") {
    PathFeedback fb;
    fb.mbs_queue = 1.0;
    PathFeedback::Path p;
    p.first_hop_rate = 0.5;
    p.relays = {{20.0, 0.9, 0.1}};  // big queue, fed faster than it drains
    fb.paths = {p};
    CHECK(path_utilities(fb)[0] < 0.0);
  }
}

TEST_CASE("stationary two-path bandit concentrates on the better path") {
  // Fixed utility gap large relative to kappa = 5, the evaluation schedule.
  LearningSchedule sched;  // 0.51 / 0.55 / 0.60, kappa 5
  FlowLearner st(2);
  std::mt19937_64 rng(123);
  const double gap = 200.0;
  long first_exceed = -1;
  for (long t = 1; t <= 10000; ++t) {
    const auto picked = sample_split(st.prob, 1, rng);
    std::vector<char> chosen(2, 0);
    chosen[picked[0]] = 1;
    const double feedback = picked[0] == 0 ? gap : 0.0;
    update_learner(st, feedback, chosen, sched, t);
    if (first_exceed < 0 && st.prob[0] > 0.9) first_exceed = t;
  }
  CHECK(first_exceed > 0);
  CHECK(st.prob[0] > 0.9);
}
