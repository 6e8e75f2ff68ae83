#include "cmdp/lp.hpp"

#include <cmath>
#include <sstream>

namespace cmdp {

void LinearProgram::validate() const {
  if (eq_matrix.rows() != eq_rhs.size() || eq_matrix.cols() != objective.size())
    throw std::invalid_argument("linear program: dimension mismatch");
  if (!objective.allFinite() || !eq_matrix.allFinite() || !eq_rhs.allFinite())
    throw std::invalid_argument("linear program: non-finite coefficients");
}

namespace {

// Tableau layout: columns [original | artificials | rhs], last row holds the
// reduced costs with T(m, last) = -objective_value.
struct Tableau {
  Matrix T;
  std::vector<int> basis;  // per row, variable index in [0, n + m)
  int m, n;

  int rhs_col() const { return n + m; }

  void pivot(int r, int jc) {
    T.row(r) /= T(r, jc);
    Vector col = T.col(jc);
    col[r] = 0.0;
    T.noalias() -= col * T.row(r);
    T.col(jc).setZero();
    T(r, jc) = 1.0;
    basis[r] = jc;
  }

  // Bland entering rule over candidate columns [0, limit): lowest index with
  // a negative reduced cost.
  int entering(int limit, double tol) const {
    for (int j = 0; j < limit; ++j)
      if (T(m, j) < -tol) return j;
    return -1;
  }

  // Ratio test; ties resolved toward the smallest basic variable index.
  int leaving(int jc, double ratio_tol) const {
    int r = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = T(i, jc);
      if (a <= ratio_tol) continue;
      const double ratio = T(i, rhs_col()) / a;
      if (r < 0 || ratio < best - 1e-12 ||
          (ratio <= best + 1e-12 && basis[i] < basis[r])) {
        r = i;
        best = ratio;
      }
    }
    return r;
  }
};

}  // namespace

LPSolution solve_lp(const LinearProgram& lp, const LPOptions& opts) {
  lp.validate();
  const int m = lp.rows();
  const int n = lp.cols();
  const std::int64_t max_iters =
      opts.max_iters > 0 ? opts.max_iters : 200 + 60ll * (m + n);

  Tableau tb;
  tb.m = m;
  tb.n = n;
  tb.T = Matrix::Zero(m + 1, n + m + 1);
  Vector row_sign = Vector::Ones(m);
  for (int i = 0; i < m; ++i) {
    const double s = lp.eq_rhs[i] < 0.0 ? -1.0 : 1.0;
    row_sign[i] = s;
    tb.T.row(i).head(n) = s * lp.eq_matrix.row(i);
    tb.T(i, n + i) = 1.0;
    tb.T(i, tb.rhs_col()) = s * lp.eq_rhs[i];
  }
  tb.basis.resize(m);
  for (int i = 0; i < m; ++i) tb.basis[i] = n + i;

  LPSolution sol;

  // Phase 1: minimize the sum of artificials.
  for (int i = 0; i < m; ++i) tb.T.row(m) -= tb.T.row(i);
  tb.T.row(m).segment(n, m).setZero();
  std::int64_t iters = 0;
  while (true) {
    const int jc = tb.entering(n, opts.feas_tol);
    if (jc < 0) break;
    const int r = tb.leaving(jc, opts.ratio_tol);
    if (r < 0) break;  // phase-1 objective bounded below by 0; treat as done
    tb.pivot(r, jc);
    if (++iters > max_iters) {
      sol.status = LPStatus::iteration_limit;
      sol.iterations = iters;
      return sol;
    }
  }
  const double phase1 = -tb.T(m, tb.rhs_col());
  if (phase1 > std::sqrt(static_cast<double>(m)) * opts.feas_tol * 1e3) {
    sol.status = LPStatus::infeasible;
    sol.iterations = iters;
    // Farkas certificate from the phase-1 duals: y_i = 1 - rc(artificial i).
    sol.dual.resize(m);
    for (int i = 0; i < m; ++i) sol.dual[i] = (1.0 - tb.T(m, n + i)) * row_sign[i];
    int worst = 0;
    for (int i = 1; i < m; ++i)
      if (std::abs(sol.dual[i]) > std::abs(sol.dual[worst])) worst = i;
    sol.farkas_row = worst;
    return sol;
  }

  // Drive leftover artificials out of the basis where the row is not
  // redundant; redundant rows keep a zero-level artificial and never pivot.
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tb.T(i, j)) > opts.ratio_tol) {
        tb.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 over the original objective.
  tb.T.row(m).setZero();
  tb.T.row(m).head(n) = lp.objective.transpose();
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) tb.T.row(m) -= lp.objective[tb.basis[i]] * tb.T.row(i);
  while (true) {
    const int jc = tb.entering(n, opts.feas_tol);
    if (jc < 0) break;
    const int r = tb.leaving(jc, opts.ratio_tol);
    if (r < 0) {
      sol.status = LPStatus::unbounded;
      sol.iterations = iters;
      sol.ray = Vector::Zero(n);
      sol.ray[jc] = 1.0;
      for (int i = 0; i < m; ++i)
        if (tb.basis[i] < n) sol.ray[tb.basis[i]] = -tb.T(i, jc);
      return sol;
    }
    tb.pivot(r, jc);
    if (++iters > max_iters) {
      sol.status = LPStatus::iteration_limit;
      sol.iterations = iters;
      return sol;
    }
  }

  sol.status = LPStatus::optimal;
  sol.iterations = iters;
  sol.primal = Vector::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) sol.primal[tb.basis[i]] = std::max(0.0, tb.T(i, tb.rhs_col()));
  sol.objective = lp.objective.dot(sol.primal);
  sol.dual.resize(m);
  for (int i = 0; i < m; ++i) sol.dual[i] = -tb.T(m, n + i) * row_sign[i];

  // Certificates against the original data.
  sol.primal_residual = (lp.eq_matrix * sol.primal - lp.eq_rhs).cwiseAbs().maxCoeff();
  const Vector rc = lp.objective - lp.eq_matrix.transpose() * sol.dual;
  sol.dual_residual = std::max(0.0, -rc.minCoeff());
  sol.comp_slack = (sol.primal.array() * rc.array()).abs().maxCoeff();
  sol.duality_gap =
      std::abs(sol.objective - lp.eq_rhs.dot(sol.dual)) / (1.0 + std::abs(sol.objective));
  return sol;
}

std::string dump_lp(const LinearProgram& lp) {
  std::ostringstream os;
  os << "minimize\n ";
  for (int j = 0; j < lp.cols(); ++j) {
    if (lp.objective[j] == 0.0) continue;
    os << " " << (lp.objective[j] >= 0 ? "+" : "") << format_double(lp.objective[j]) << " "
       << (j < static_cast<int>(lp.labels.size()) ? lp.labels[j] : "z" + std::to_string(j));
  }
  os << "\nsubject to\n";
  for (int i = 0; i < lp.rows(); ++i) {
    os << " ";
    for (int j = 0; j < lp.cols(); ++j) {
      const double a = lp.eq_matrix(i, j);
      if (a == 0.0) continue;
      os << " " << (a >= 0 ? "+" : "") << format_double(a) << " "
         << (j < static_cast<int>(lp.labels.size()) ? lp.labels[j] : "z" + std::to_string(j));
    }
    os << " = " << format_double(lp.eq_rhs[i]) << "\n";
  }
  os << "and nonnegativity on all variables\n";
  return os.str();
}

}  // namespace cmdp
