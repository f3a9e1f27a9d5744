#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "mmh/common.hpp"

namespace mmh {

/// a . v <= b
struct LinearRow {
  Eigen::VectorXd a;
  double b = 0.0;
};

/// || A v + c ||_2 <= d . v + e
struct SocRow {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  Eigen::VectorXd d;
  double e = 0.0;
};

/// v[x] <= alpha * ln(1 + beta * v[p]) [+ v[relax]],  alpha, beta > 0.
/// `relax` (optional) names a slack variable added to the right-hand side.
struct LogRateRow {
  int x = -1;
  int p = -1;
  double alpha = 1.0;
  double beta = 1.0;
  int relax = -1;
};

/// Canonical convex subproblem: linear objective (maximize) over box bounds,
/// linear rows, second-order-cone rows and logarithmic rate rows.
struct ConicProgram {
  Eigen::VectorXd objective;  // maximize objective . v
  Eigen::VectorXd lo, hi;
  std::vector<LinearRow> linear;
  std::vector<SocRow> soc;
  std::vector<LogRateRow> lograte;
  std::vector<std::string> names;

  int n_vars() const { return int(objective.size()); }
  int n_rows() const { return int(linear.size() + soc.size() + lograte.size()); }

  int add_var(const std::string& name, double lo_v, double hi_v);
  void add_linear(const Eigen::VectorXd& a, double b) { linear.push_back({a, b}); }
  void validate() const;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SolveStatus { Optimal, Infeasible, IterLimit };

std::string to_string(SolveStatus status);

struct Solution {
  Eigen::VectorXd point;
  double objective = 0.0;
  SolveStatus status = SolveStatus::IterLimit;
  double kkt_residual = 0.0;
  int iterations = 0;  // accepted Newton steps, both phases
};

struct SolverOptions {
  double gap_tol = 1e-9;        // target barrier duality gap (absolute)
  double feas_tol = 1e-8;       // per-row primal feasibility at the reported point
  double kkt_tol = 1e-6;        // relative stationarity residual for Optimal
  int max_newton = 600;
  double t_init = 1.0;
  double t_factor = 20.0;
  /// Optional strictly feasible warm start (skips phase 1 when valid).
  const Eigen::VectorXd* warm_start = nullptr;
};

/// Log-barrier path-following interior point. Deterministic.
Solution solve(const ConicProgram& program, const SolverOptions& options = {});

/// Per-row signed violations (positive = violated) in program row order:
/// linear rows, then SOC, then lograte, then lo/hi bounds per variable.
struct ResidualReport {
  std::vector<double> rows;
  double max_violation = 0.0;
};

ResidualReport check_point(const ConicProgram& program, const Eigen::VectorXd& point);

/// One line per constraint; replayable fixture format for failing subproblems.
std::string dump(const ConicProgram& program);

}  // namespace mmh
