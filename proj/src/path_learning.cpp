#include "mmh/path_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmh {

ScheduleReport validate_schedule(const LearningSchedule& schedule) {
  ScheduleReport report;
  auto fail = [&](const std::string& what) {
    report.ok = false;
    report.violations.push_back(what);
  };
  if (schedule.a_utility <= 0.5)
    fail("utility exponent <= 0.5: sum of squared utility rates diverges");
  if (schedule.a_prob > 1.0) fail("probability exponent > 1: sum of probability rates converges");
  if (schedule.a_regret <= schedule.a_utility)
    fail("regret exponent <= utility exponent: regret/utility rate ratio does not vanish");
  if (schedule.a_prob <= schedule.a_regret)
    fail("probability exponent <= regret exponent: probability/regret rate ratio does not vanish");
  if (!(schedule.kappa > 0.0)) fail("temperature kappa must be positive");
  return report;
}

std::vector<double> bg_distribution(const std::vector<double>& regrets, double kappa) {
  const size_t n = regrets.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  double max_clamped = 0.0;  // max of [r]+ ; subtracting it keeps exp() in range
  for (double r : regrets) max_clamped = std::max(max_clamped, std::max(r, 0.0));
  double sum = 0.0;
  for (size_t m = 0; m < n; ++m) {
    out[m] = std::exp((std::max(regrets[m], 0.0) - max_clamped) / kappa);
    sum += out[m];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> regret_matching_distribution(const std::vector<double>& regrets) {
  const size_t n = regrets.size();
  std::vector<double> out(n, 0.0);
  double sum = 0.0;
  for (size_t m = 0; m < n; ++m) {
    out[m] = std::max(regrets[m], 0.0);
    sum += out[m];
  }
  if (sum <= 0.0) {
    std::fill(out.begin(), out.end(), n ? 1.0 / double(n) : 0.0);
    return out;
  }
  for (auto& v : out) v /= sum;
  return out;
}

double update_learner(FlowLearner& state, double feedback, const std::vector<char>& chosen,
                      const LearningSchedule& schedule, long t, StrategyMap map) {
  const int n = state.n_paths();
  const double g = schedule.utility_rate(t);
  const double e = schedule.regret_rate(t);
  const double z = schedule.prob_rate(t);

  for (int m = 0; m < n; ++m)
    if (chosen[m]) state.u_hat[m] += g * (feedback - state.u_hat[m]);
  for (int m = 0; m < n; ++m)
    state.regret_hat[m] += e * (state.u_hat[m] - feedback - state.regret_hat[m]);

  const std::vector<double> target = map == StrategyMap::BoltzmannGibbs
                                         ? bg_distribution(state.regret_hat, schedule.kappa)
                                         : regret_matching_distribution(state.regret_hat);
  double l1 = 0.0;
  for (int m = 0; m < n; ++m) {
    const double step = z * (target[m] - state.prob[m]);
    state.prob[m] += step;
    l1 += std::abs(step);
  }
  // Exact simplex restoration against floating-point drift.
  const double sum = std::accumulate(state.prob.begin(), state.prob.end(), 0.0);
  for (auto& p : state.prob) p = std::max(p, 0.0) / sum;

  state.last_utility = feedback;
  state.stage = t;
  return l1;
}

std::vector<int> sample_split(const std::vector<double>& prob, int n_select,
                              std::mt19937_64& rng) {
  const int n = int(prob.size());
  std::vector<int> picked;
  if (n_select >= n) {
    picked.resize(n);
    std::iota(picked.begin(), picked.end(), 0);
    return picked;
  }
  std::vector<double> weights = prob;
  for (auto& w : weights)
    if (!std::isfinite(w) || w < 0.0) w = 0.0;
  std::vector<char> taken(n, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < n_select; ++k) {
    double total = 0.0;
    for (int m = 0; m < n; ++m)
      if (!taken[m]) total += weights[m];
    if (total <= 0.0) {
      // Remaining strategy mass exhausted: uniform over the rest.
      for (int m = 0; m < n; ++m)
        if (!taken[m]) weights[m] = 1.0;
      total = double(n - k);
    }
    const double u = unif(rng) * total;
    double acc = 0.0;
    int choice = -1;
    for (int m = 0; m < n; ++m) {
      if (taken[m]) continue;
      acc += weights[m];
      if (choice < 0 && u <= acc && weights[m] > 0.0) choice = m;
    }
    if (choice < 0) {
      for (int m = n - 1; m >= 0; --m)
        if (!taken[m] && weights[m] > 0.0) {
          choice = m;
          break;
        }
    }
    if (choice < 0) {
      for (int m = 0; m < n; ++m)
        if (!taken[m]) {
          choice = m;
          break;
        }
    }
    taken[choice] = 1;
    picked.push_back(choice);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<double> path_utilities(const PathFeedback& feedback) {
  std::vector<double> out;
  out.reserve(feedback.paths.size());
  for (const auto& path : feedback.paths) {
    double u = feedback.mbs_queue * path.first_hop_rate;
    for (const auto& hop : path.relays) u -= hop.queue * (hop.in_rate - hop.out_rate);
    out.push_back(u);
  }
  return out;
}

}  // namespace mmh
