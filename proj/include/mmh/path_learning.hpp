#pragma once

#include <random>
#include <string>
#include <vector>

#include "mmh/common.hpp"

namespace mmh {

/// Decaying learning rates 1/(t+1)^a for the utility / regret / probability
/// estimators, plus the Boltzmann-Gibbs temperature.
struct LearningSchedule {
  double a_utility = 0.51;   // a_gamma
  double a_regret = 0.55;    // a_eta
  double a_prob = 0.60;      // a_zeta
  double kappa = 5.0;

  double utility_rate(long t) const { return std::pow(double(t) + 1.0, -a_utility); }
  double regret_rate(long t) const { return std::pow(double(t) + 1.0, -a_regret); }
  double prob_rate(long t) const { return std::pow(double(t) + 1.0, -a_prob); }
};

struct ScheduleReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks 0.5 < a_utility < a_regret < a_prob <= 1 and reports which
/// convergence condition (divergent sums, convergent squared sums, timescale
/// ratios) each violation breaks.
ScheduleReport validate_schedule(const LearningSchedule& schedule);

/// Per-flow learner state: utility estimates, regret estimates and the mixed
/// strategy over that flow's candidate paths.
struct FlowLearner {
  std::vector<double> u_hat;
  std::vector<double> regret_hat;
  std::vector<double> prob;
  double last_utility = 0.0;  // feedback observed from the previous stage
  long stage = 0;

  explicit FlowLearner(int n_paths = 0)
      : u_hat(n_paths, 0.0),
        regret_hat(n_paths, 0.0),
        prob(n_paths, n_paths > 0 ? 1.0 / n_paths : 0.0) {}
  int n_paths() const { return int(prob.size()); }
};

/// Boltzmann-Gibbs kernel: softmax of clamped regrets [r]+ / kappa.
std::vector<double> bg_distribution(const std::vector<double>& regrets, double kappa);

/// Regret-proportional probabilities [r]+ / sum [r]+ (uniform when all
/// regrets are non-positive); the alternative strategy map.
std::vector<double> regret_matching_distribution(const std::vector<double>& regrets);

enum class StrategyMap { BoltzmannGibbs, RegretProportional };

/// One learning step at stage `t`: utility estimates move toward the observed
/// feedback on the chosen paths, regrets track (u_hat - feedback), and the
/// mixed strategy relaxes toward the kernel distribution. Returns the L1 step
/// taken by the strategy.
double update_learner(FlowLearner& state, double feedback, const std::vector<char>& chosen,
                      const LearningSchedule& schedule, long t,
                      StrategyMap map = StrategyMap::BoltzmannGibbs);

/// Draws n_select distinct paths without replacement proportional to prob.
std::vector<int> sample_split(const std::vector<double>& prob, int n_select,
                              std::mt19937_64& rng);

/// Window-averaged observations for one flow, in learner units: queues are in
/// mean-arrival slots (Q / (mean_arrival*slot)), rates in rate-cap units
/// (R / (max_rate*slot)).
struct PathFeedback {
  struct Hop {
    double queue = 0.0;
    double in_rate = 0.0;
    double out_rate = 0.0;
  };
  struct Path {
    double first_hop_rate = 0.0;
    std::vector<Hop> relays;
  };
  double mbs_queue = 0.0;
  std::vector<Path> paths;
};

/// Per-path utility decomposition of the path-selection objective:
///   u_m = Q_mbs * R(first hop of m) - sum over relays i of m of Q_i * (R_in - R_out).
/// High first-hop service from a long queue is good; feeding a backlogged
/// relay faster than it drains is bad.
std::vector<double> path_utilities(const PathFeedback& feedback);

}  // namespace mmh
