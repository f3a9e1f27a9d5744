#include "mmh/conic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mmh {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::IterLimit: return "IterLimit";
  }
  return "?";
}

int ConicProgram::add_var(const std::string& name, double lo_v, double hi_v) {
  const int idx = n_vars();
  objective.conservativeResize(idx + 1);
  objective(idx) = 0.0;
  lo.conservativeResize(idx + 1);
  hi.conservativeResize(idx + 1);
  lo(idx) = lo_v;
  hi(idx) = hi_v;
  names.push_back(name);
  return idx;
}

void ConicProgram::validate() const {
  const int n = n_vars();
  if (n < 1) throw Error(Errc::BadConfig, "program has no variables");
  if (lo.size() != n || hi.size() != n) throw Error(Errc::DimensionMismatch, "bounds size mismatch");
  for (int i = 0; i < n; ++i)
    if (!(lo(i) < hi(i)))
      throw Error(Errc::BadConfig, "need lo < hi for variable " + std::to_string(i));
  if (!objective.allFinite()) throw Error(Errc::BadConfig, "objective has non-finite entries");
  for (const auto& row : linear) {
    if (row.a.size() != n) throw Error(Errc::DimensionMismatch, "linear row size mismatch");
    if (!row.a.allFinite() || !std::isfinite(row.b))
      throw Error(Errc::BadConfig, "linear row with non-finite coefficients");
  }
  for (const auto& row : soc) {
    if (row.A.cols() != n || row.d.size() != n || row.A.rows() != row.c.size())
      throw Error(Errc::DimensionMismatch, "soc row size mismatch");
    if (!row.A.allFinite() || !row.c.allFinite() || !row.d.allFinite() || !std::isfinite(row.e))
      throw Error(Errc::BadConfig, "soc row with non-finite coefficients");
  }
  for (const auto& row : lograte) {
    if (row.x < 0 || row.x >= n || row.p < 0 || row.p >= n || (row.relax >= 0 && row.relax >= n))
      throw Error(Errc::DimensionMismatch, "lograte row index out of range");
    if (!(row.alpha > 0.0) || !(row.beta > 0.0))
      throw Error(Errc::BadConfig, "lograte row needs alpha, beta > 0");
    if (lo(row.p) < 0.0)
      throw Error(Errc::BadConfig, "lograte row needs a nonnegative lower bound on p");
  }
}

namespace {

// Interior-point engine for one program. Row supports (the variables a row
// actually touches) are collected once so Hessian assembly stays O(support^2).
class Barrier {
 public:
  explicit Barrier(const ConicProgram& P) : P_(P), n_(P.n_vars()) {
    lin_cols_.reserve(P.linear.size());
    for (const auto& row : P.linear) {
      std::vector<int> cols;
      for (int i = 0; i < n_; ++i)
        if (row.a(i) != 0.0) cols.push_back(i);
      lin_cols_.push_back(std::move(cols));
    }
    soc_cols_.reserve(P.soc.size());
    for (const auto& row : P.soc) {
      std::vector<int> cols;
      for (int i = 0; i < n_; ++i)
        if (row.d(i) != 0.0 || row.A.col(i).any()) cols.push_back(i);
      soc_cols_.push_back(std::move(cols));
    }
    m_ = int(P.linear.size() + P.soc.size() + P.lograte.size());
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(P.lo(i))) ++m_;
      if (std::isfinite(P.hi(i))) ++m_;
    }
  }

  int term_count() const { return m_; }

  // phi(v); +inf outside the domain.
  double value(const Eigen::VectorXd& v) const {
    double phi = 0.0;
    for (const auto& row : P_.linear) {
      const double s = row.b - row.a.dot(v);
      if (!(s > 0.0)) return kInf;
      phi -= std::log(s);
    }
    for (const auto& row : P_.lograte) {
      const double onep = 1.0 + row.beta * v(row.p);
      if (!(onep > 0.0)) return kInf;
      double s = row.alpha * std::log(onep) - v(row.x);
      if (row.relax >= 0) s += v(row.relax);
      if (!(s > 0.0)) return kInf;
      phi -= std::log(s);
    }
    for (const auto& row : P_.soc) {
      const double wl = row.d.dot(v) + row.e;
      if (!(wl > 0.0)) return kInf;
      const double r = wl * wl - (row.A * v + row.c).squaredNorm();
      if (!(r > 0.0)) return kInf;
      phi -= std::log(r);
    }
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(P_.lo(i))) {
        const double s = v(i) - P_.lo(i);
        if (!(s > 0.0)) return kInf;
        phi -= std::log(s);
      }
      if (std::isfinite(P_.hi(i))) {
        const double s = P_.hi(i) - v(i);
        if (!(s > 0.0)) return kInf;
        phi -= std::log(s);
      }
    }
    return phi;
  }

  // phi, grad, hess; false outside the domain.
  bool derivatives(const Eigen::VectorXd& v, double& phi, Eigen::VectorXd& g,
                   Eigen::MatrixXd& H) const {
    phi = 0.0;
    g.setZero(n_);
    H.setZero(n_, n_);

    for (size_t k = 0; k < P_.linear.size(); ++k) {
      const auto& row = P_.linear[k];
      const double s = row.b - row.a.dot(v);
      if (!(s > 0.0)) return false;
      phi -= std::log(s);
      const double inv = 1.0 / s, inv2 = inv * inv;
      for (int i : lin_cols_[k]) {
        g(i) += row.a(i) * inv;
        for (int j : lin_cols_[k])
          if (j <= i) H(i, j) += row.a(i) * row.a(j) * inv2;
      }
    }

    for (const auto& row : P_.lograte) {
      const double onep = 1.0 + row.beta * v(row.p);
      if (!(onep > 0.0)) return false;
      double s = row.alpha * std::log(onep) - v(row.x);
      if (row.relax >= 0) s += v(row.relax);
      if (!(s > 0.0)) return false;
      phi -= std::log(s);
      const double q = row.alpha * row.beta / onep;
      const double curv = row.alpha * row.beta * row.beta / (onep * onep);
      const double inv = 1.0 / s, inv2 = inv * inv;
      const int idx[3] = {row.p, row.x, row.relax};
      const double gs[3] = {q, -1.0, 1.0};  // gradient of the slack
      const int cnt = row.relax >= 0 ? 3 : 2;
      for (int a = 0; a < cnt; ++a) {
        g(idx[a]) -= gs[a] * inv;
        for (int b = 0; b < cnt; ++b) {
          const int i = std::max(idx[a], idx[b]), j = std::min(idx[a], idx[b]);
          if (idx[a] >= idx[b]) H(i, j) += gs[a] * gs[b] * inv2;
        }
      }
      H(row.p, row.p) += curv * inv;
    }

    for (size_t k = 0; k < P_.soc.size(); ++k) {
      const auto& row = P_.soc[k];
      const double wl = row.d.dot(v) + row.e;
      if (!(wl > 0.0)) return false;
      const Eigen::VectorXd u = row.A * v + row.c;
      const double r = wl * wl - u.squaredNorm();
      if (!(r > 0.0)) return false;
      phi -= std::log(r);
      const double invr = 1.0 / r, invr2 = invr * invr;
      const auto& cols = soc_cols_[k];
      // gr_i = 2 wl d_i - 2 (A^T u)_i on the support
      std::array<double, 16> grbuf{};
      const int cnt = int(cols.size());
      for (int a = 0; a < cnt; ++a) {
        const int i = cols[a];
        double atu = 0.0;
        for (int rr = 0; rr < row.A.rows(); ++rr) atu += row.A(rr, i) * u(rr);
        grbuf[a] = 2.0 * wl * row.d(i) - 2.0 * atu;
        g(i) -= grbuf[a] * invr;
      }
      for (int a = 0; a < cnt; ++a) {
        const int i = cols[a];
        for (int b = 0; b <= a; ++b) {
          const int j = cols[b];
          double ata = 0.0;
          for (int rr = 0; rr < row.A.rows(); ++rr) ata += row.A(rr, i) * row.A(rr, j);
          const double hij = grbuf[a] * grbuf[b] * invr2 + 2.0 * invr * (ata - row.d(i) * row.d(j));
          if (i >= j)
            H(i, j) += hij;
          else
            H(j, i) += hij;
        }
      }
    }

    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(P_.lo(i))) {
        const double s = v(i) - P_.lo(i);
        if (!(s > 0.0)) return false;
        phi -= std::log(s);
        g(i) -= 1.0 / s;
        H(i, i) += 1.0 / (s * s);
      }
      if (std::isfinite(P_.hi(i))) {
        const double s = P_.hi(i) - v(i);
        if (!(s > 0.0)) return false;
        phi -= std::log(s);
        g(i) += 1.0 / s;
        H(i, i) += 1.0 / (s * s);
      }
    }
    return true;
  }

 private:
  const ConicProgram& P_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<int>> lin_cols_, soc_cols_;
};

struct CenterResult {
  int newton_steps = 0;
  bool stalled = false;
  double decrement2 = 0.0;  // Newton decrement^2 at exit (affine invariant)
};

// Newton minimization of t * f0.v + phi(v); the merit must decrease on every
// accepted step (hard assertion).
CenterResult center(const Barrier& barrier, const Eigen::VectorXd& f0, double t,
                    Eigen::VectorXd& v, int max_steps,
                    const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  CenterResult res;
  const int n = int(v.size());
  double phi;
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd H(n, n);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(n);

  for (int it = 0; it < max_steps; ++it) {
    if (!barrier.derivatives(v, phi, grad, H))
      throw std::logic_error("interior-point iterate left the barrier domain");
    Eigen::VectorXd g = t * f0 + grad;
    Eigen::VectorXd step;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      if (attempt > 0) {
        ridge = ridge == 0.0 ? 1e-12 * (1.0 + H.trace() / n) : ridge * 1e4;
        H.diagonal().array() += ridge;
      }
      ldlt.compute(H.selfadjointView<Eigen::Lower>());
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(-g);
        if (step.allFinite()) break;
        step.resize(0);
      }
    }
    if (step.size() == 0) {
      res.stalled = true;
      return res;
    }
    const double decrement2 = -g.dot(step);
    res.decrement2 = std::max(decrement2, 0.0);
    // The decrement is affine invariant; 1e-9 leaves the iterate deep in the
    // quadratic-convergence zone of the self-concordant barrier.
    if (!(decrement2 > 1e-9)) return res;

    const double merit0 = t * f0.dot(v) + phi;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd vt = v + alpha * step;
      const double phi_t = barrier.value(vt);
      if (std::isfinite(phi_t)) {
        const double merit = t * f0.dot(vt) + phi_t;
        if (merit <= merit0 - 0.25 * alpha * decrement2 + 1e-12 * std::abs(merit0)) {
          if (merit > merit0 + 1e-9 * (1.0 + std::abs(merit0)))
            throw std::logic_error("interior-point merit increased on an accepted step");
          v = vt;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Progress below floating-point resolution: already as centered as the
      // arithmetic allows at this t.
      res.stalled = true;
      return res;
    }
    ++res.newton_steps;
    if (early_stop && early_stop(v)) return res;
  }
  res.stalled = true;
  return res;
}

Eigen::VectorXd box_center(const ConicProgram& P) {
  const int n = P.n_vars();
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const bool flo = std::isfinite(P.lo(i)), fhi = std::isfinite(P.hi(i));
    if (flo && fhi)
      v(i) = 0.5 * (P.lo(i) + P.hi(i));
    else if (flo)
      v(i) = P.lo(i) + 1.0;
    else if (fhi)
      v(i) = P.hi(i) - 1.0;
    else
      v(i) = 0.0;
  }
  return v;
}

// Worst row violation; +inf outside a log/soc domain.
double max_row_violation(const ConicProgram& P, const Eigen::VectorXd& v) {
  double worst = -kInf;
  for (const auto& row : P.linear) worst = std::max(worst, row.a.dot(v) - row.b);
  for (const auto& row : P.lograte) {
    const double onep = 1.0 + row.beta * v(row.p);
    if (!(onep > 0.0)) return kInf;
    double f = v(row.x) - row.alpha * std::log(onep);
    if (row.relax >= 0) f -= v(row.relax);
    worst = std::max(worst, f);
  }
  for (const auto& row : P.soc) {
    const double wl = row.d.dot(v) + row.e;
    worst = std::max(worst, (row.A * v + row.c).norm() - wl);
  }
  return worst;
}

bool strictly_in_box(const ConicProgram& P, const Eigen::VectorXd& v) {
  for (int i = 0; i < P.n_vars(); ++i) {
    if (std::isfinite(P.lo(i)) && !(v(i) > P.lo(i))) return false;
    if (std::isfinite(P.hi(i)) && !(v(i) < P.hi(i))) return false;
  }
  return true;
}

struct Phase1Result {
  bool feasible = false;
  Eigen::VectorXd point;
  int newton_steps = 0;
};

// Minimizes a shift added to every row until the iterate is strictly feasible
// for the original program, or concludes that no strictly feasible point
// exists (big-M cap on the shift).
Phase1Result phase1(const ConicProgram& P, const SolverOptions& opt,
                    const Eigen::VectorXd* start) {
  const int n = P.n_vars();
  ConicProgram Q = P;
  Q.objective.setZero();

  double bscale = 1.0;
  for (const auto& row : P.linear) bscale = std::max(bscale, std::abs(row.b));
  const double big_m = 1e4 * bscale;

  const int sv = Q.add_var("phase1_shift", -10.0, big_m);
  Q.objective(sv) = -1.0;  // maximize -s == minimize the shift
  for (auto& row : Q.linear) {
    row.a.conservativeResize(n + 1);
    row.a(sv) = -1.0;
  }
  // Rows that already carry a relax slack stay covered by it; the start below
  // opens those slacks wide enough.
  for (auto& row : Q.lograte)
    if (row.relax < 0) row.relax = sv;
  for (auto& row : Q.soc) {
    Eigen::MatrixXd A(row.A.rows(), n + 1);
    A << row.A, Eigen::VectorXd::Zero(row.A.rows());
    row.A = std::move(A);
    row.d.conservativeResize(n + 1);
    row.d(sv) = 1.0;
  }

  Eigen::VectorXd v0(n + 1);
  v0.head(n) = start && start->size() == n && strictly_in_box(P, *start) ? *start : box_center(P);
  for (const auto& row : P.lograte) {
    if (row.relax < 0) continue;
    const double onep = std::max(1.0 + row.beta * v0(row.p), 1e-12);
    const double need = v0(row.x) - row.alpha * std::log(onep) + 1.0;
    double opened = std::max(v0(row.relax), need);
    if (std::isfinite(P.hi(row.relax)))
      opened = std::min(opened, P.hi(row.relax) - 1e-9 * (1.0 + std::abs(P.hi(row.relax))));
    v0(row.relax) = opened;
  }
  double viol = max_row_violation(P, v0.head(n));
  if (!std::isfinite(viol)) {
    v0.head(n) = box_center(P);
    viol = max_row_violation(P, v0.head(n));
    if (!std::isfinite(viol)) viol = big_m / 2.0;
  }
  const double s0 = std::min(std::max(viol, 0.0) + 1.0, big_m * 0.5);
  v0(sv) = s0;

  Phase1Result res;
  const double exit_level = -1e-7 * (1.0 + std::abs(s0));
  auto strictly_feasible = [&](const Eigen::VectorXd& v) { return v(sv) < exit_level; };

  Barrier barrier(Q);
  const Eigen::VectorXd f0 = -Q.objective;
  const int m = barrier.term_count();
  double t = opt.t_init;
  int budget = opt.max_newton;
  Eigen::VectorXd v = v0;
  while (budget > 0) {
    auto cr = center(barrier, f0, t, v, budget, strictly_feasible);
    res.newton_steps += cr.newton_steps;
    budget -= std::max(cr.newton_steps, 1);
    if (strictly_feasible(v)) {
      res.feasible = true;
      break;
    }
    if (double(m) / t <= 1e-9) break;  // shift minimized and still nonnegative
    t *= opt.t_factor;
  }
  res.point = v.head(n);
  if (!res.feasible)
    res.feasible = max_row_violation(P, res.point) < 0.0 && strictly_in_box(P, res.point);
  return res;
}

}  // namespace

Solution solve(const ConicProgram& program, const SolverOptions& options) {
  program.validate();
  const int n = program.n_vars();
  Solution sol;
  sol.point = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd v;
  int steps = 0;
  bool have_interior = false;
  if (options.warm_start && options.warm_start->size() == n &&
      strictly_in_box(program, *options.warm_start) &&
      max_row_violation(program, *options.warm_start) < 0.0) {
    v = *options.warm_start;
    have_interior = true;
  }
  if (!have_interior) {
    auto p1 = phase1(program, options, options.warm_start);
    steps += p1.newton_steps;
    if (!p1.feasible) {
      sol.status = SolveStatus::Infeasible;
      sol.point = p1.point;
      sol.objective = program.objective.dot(p1.point);
      sol.iterations = steps;
      return sol;
    }
    v = p1.point;
  }

  Barrier barrier(program);
  const Eigen::VectorXd f0 = -program.objective;
  const int m = barrier.term_count();
  double t = options.t_init;
  double gap_rel = kInf;
  double centering = kInf;
  while (true) {
    const int budget = std::min(options.max_newton - steps, 100);
    if (budget <= 0) break;
    auto cr = center(barrier, f0, t, v, budget, nullptr);
    steps += std::max(cr.newton_steps, 1);
    centering = cr.decrement2;
    const double obj = program.objective.dot(v);
    gap_rel = double(m) / t / std::max(1.0, std::abs(obj));
    if (gap_rel <= options.gap_tol) break;
    if (t > 1e16) break;
    t *= options.t_factor;
  }

  // Suboptimality of a nearly centered iterate is ~ m/t plus the (affine
  // invariant) Newton decrement; both enter the reported residual.
  sol.point = v;
  sol.objective = program.objective.dot(v);
  const double obj_scale = std::max(1.0, std::abs(sol.objective));
  sol.kkt_residual = gap_rel + std::min(centering, 1.0) / obj_scale;
  sol.iterations = steps;
  sol.status = sol.kkt_residual <= options.kkt_tol ? SolveStatus::Optimal : SolveStatus::IterLimit;
  return sol;
}

ResidualReport check_point(const ConicProgram& program, const Eigen::VectorXd& point) {
  if (point.size() != program.n_vars())
    throw Error(Errc::DimensionMismatch, "point dimension does not match program");
  ResidualReport rep;
  auto push = [&rep](double r) {
    rep.rows.push_back(r);
    rep.max_violation = std::max(rep.max_violation, r);
  };
  for (const auto& row : program.linear) push(row.a.dot(point) - row.b);
  for (const auto& row : program.soc)
    push((row.A * point + row.c).norm() - (row.d.dot(point) + row.e));
  for (const auto& row : program.lograte) {
    const double onep = 1.0 + row.beta * point(row.p);
    if (!(onep > 0.0)) {
      push(kInf);
      continue;
    }
    double f = point(row.x) - row.alpha * std::log(onep);
    if (row.relax >= 0) f -= point(row.relax);
    push(f);
  }
  for (int i = 0; i < program.n_vars(); ++i) {
    if (std::isfinite(program.lo(i))) push(program.lo(i) - point(i));
    if (std::isfinite(program.hi(i))) push(point(i) - program.hi(i));
  }
  return rep;
}

std::string dump(const ConicProgram& program) {
  std::ostringstream os;
  os.precision(17);
  os << "vars " << program.n_vars() << "\n";
  for (int i = 0; i < program.n_vars(); ++i) {
    os << "var " << i << " " << (i < int(program.names.size()) ? program.names[i] : "v") << " in ["
       << program.lo(i) << ", " << program.hi(i) << "] obj " << program.objective(i) << "\n";
  }
  for (const auto& row : program.linear) {
    os << "linear";
    for (int i = 0; i < row.a.size(); ++i)
      if (row.a(i) != 0.0) os << " " << i << ":" << row.a(i);
    os << " <= " << row.b << "\n";
  }
  for (const auto& row : program.soc) {
    os << "soc";
    for (int r = 0; r < row.A.rows(); ++r) {
      os << " [";
      for (int i = 0; i < row.A.cols(); ++i)
        if (row.A(r, i) != 0.0) os << " " << i << ":" << row.A(r, i);
      os << " +" << row.c(r) << " ]";
    }
    os << " <=";
    for (int i = 0; i < row.d.size(); ++i)
      if (row.d(i) != 0.0) os << " " << i << ":" << row.d(i);
    os << " +" << row.e << "\n";
  }
  for (const auto& row : program.lograte) {
    os << "lograte x" << row.x << " <= " << row.alpha << " ln(1 + " << row.beta << " p" << row.p
       << ")";
    if (row.relax >= 0) os << " + v" << row.relax;
    os << "\n";
  }
  return os.str();
}

}  // namespace mmh
