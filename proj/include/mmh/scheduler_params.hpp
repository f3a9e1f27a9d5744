#pragma once

#include <string>

#include "mmh/path_learning.hpp"

namespace mmh {

enum class Scheme { Proposed, Baseline1, Baseline2, Baseline3, SingleHop };

Scheme scheme_from_string(const std::string& name);
std::string to_string(Scheme scheme);

/// Auxiliary-rate utility. Log1p is log(1+x) on cap-normalized rates (bounded
/// slope 1, which is what makes the queue bounds hold); PaperLog is log(x)
/// with the max(nu/Y, 0) closed form.
enum class UtilityForm { Log1p, PaperLog };

struct SchedulerParams {
  double nu = 100.0;            // drift-penalty trade-off
  long long_period = 100;       // slots between path re-selections
  Scheme scheme = Scheme::Proposed;
  UtilityForm utility = UtilityForm::Log1p;
  LearningSchedule learning;

  double sca_tol = 1e-2;
  int sca_max_iter = 50;
  bool relay_rows_always_on = true;   // keep relay ratio rows even when the history term is slack
  bool mbs_delay_row = true;          // explicit MBS service-floor row alongside the rate coupling
  bool windowed_delay_terms = false;  // sliding window of beta_slots on the history sums
};

}  // namespace mmh
