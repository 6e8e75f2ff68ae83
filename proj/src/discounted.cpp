#include "cmdp/discounted.hpp"

#include <cmath>

namespace cmdp {

void StationaryPolicy::validate() const {
  for (int i = 0; i < n_states(); ++i) {
    if (std::abs(prob.row(i).sum() - 1.0) > 1e-9 || prob.row(i).minCoeff() < -1e-12)
      throw std::invalid_argument("policy: row " + std::to_string(i) + " not stochastic");
  }
}

StationaryPolicy StationaryPolicy::deterministic(const std::vector<int>& act, int n_actions) {
  Matrix prob = Matrix::Zero(static_cast<Eigen::Index>(act.size()), n_actions);
  for (std::size_t i = 0; i < act.size(); ++i) prob(static_cast<Eigen::Index>(i), act[i]) = 1.0;
  return StationaryPolicy{std::move(prob)};
}

double OccupationMeasure::balance_residual(const FiniteCMDP& fm) const {
  Vector flow = (1.0 - fm.beta) * fm.gamma;
  for (int a = 0; a < fm.n_actions; ++a)
    flow += fm.beta * fm.p[a].transpose() * zeta.col(a);
  return (marginal - flow).cwiseAbs().maxCoeff();
}

LinearProgram build_occupation_lp(const FiniteCMDP& fm) {
  const int n = fm.n_states, na = fm.n_actions, q = fm.q();
  const int vars = n * na + q;
  LinearProgram lp;
  lp.objective = Vector::Zero(vars);
  lp.eq_matrix = Matrix::Zero(n + q, vars);
  lp.eq_rhs = Vector::Zero(n + q);
  lp.labels.reserve(vars);

  for (int i = 0; i < n; ++i)
    for (int a = 0; a < na; ++a) {
      const int col = i * na + a;
      lp.objective[col] = fm.c(i, a);
      lp.eq_matrix(i, col) += 1.0;  // marginal
      for (int j = 0; j < n; ++j) lp.eq_matrix(j, col) -= fm.beta * fm.p[a](i, j);
      for (int l = 0; l < q; ++l) lp.eq_matrix(n + l, col) = fm.d[l](i, a);
      lp.labels.push_back("zeta(" + std::to_string(i) + "," + std::to_string(a) + ")");
    }
  for (int l = 0; l < q; ++l) {
    lp.eq_matrix(n + l, n * na + l) = 1.0;  // slack
    lp.eq_rhs[n + l] = fm.k[l];
    lp.labels.push_back("alpha(" + std::to_string(l) + ")");
  }
  lp.eq_rhs.head(n) = (1.0 - fm.beta) * fm.gamma;
  return lp;
}

namespace {

StationaryPolicy disintegrate(const Matrix& zeta) {
  const int n = static_cast<int>(zeta.rows()), na = static_cast<int>(zeta.cols());
  StationaryPolicy pol{Matrix(n, na)};
  for (int i = 0; i < n; ++i) {
    const double m = zeta.row(i).sum();
    if (m > 1e-12)
      pol.prob.row(i) = zeta.row(i) / m;
    else
      pol.prob.row(i).setConstant(1.0 / na);  // unreachable state
  }
  return pol;
}

}  // namespace

DiscountedSolution solve_discounted(const FiniteCMDP& fm, const LPOptions& opts) {
  const int n = fm.n_states, na = fm.n_actions, q = fm.q();
  const LinearProgram lp = build_occupation_lp(fm);
  LPSolution sol = solve_lp(lp, opts);
  if (sol.status == LPStatus::infeasible)
    throw InfeasibleError("constraints infeasible at this grid");
  if (sol.status != LPStatus::optimal)
    throw std::runtime_error("occupation LP did not reach optimality");

  DiscountedSolution out;
  out.lp = sol;
  out.value = sol.objective;
  out.occupation.zeta.resize(n, na);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < na; ++a) out.occupation.zeta(i, a) = sol.primal[i * na + a];
  out.occupation.marginal = out.occupation.zeta.rowwise().sum();
  out.policy = disintegrate(out.occupation.zeta);

  out.dual.u = sol.dual.head(n);
  out.dual.delta = sol.dual.tail(q);
  for (int l = 0; l < q; ++l) out.dual.delta[l] = std::min(out.dual.delta[l], 0.0);
  out.dual.objective = (1.0 - fm.beta) * fm.gamma.dot(out.dual.u) + fm.k.dot(out.dual.delta);
  double viol = 0.0;
  for (int a = 0; a < na; ++a) {
    Vector rhs = fm.c.col(a) + fm.beta * (fm.p[a] * out.dual.u);
    for (int l = 0; l < q; ++l) rhs -= out.dual.delta[l] * fm.d[l].col(a);
    viol = std::max(viol, (out.dual.u - rhs).maxCoeff());
  }
  out.dual.max_violation = std::max(viol, 0.0);
  return out;
}

Vector lagrangian_value_iteration(const FiniteCMDP& fm, const Vector& delta, double tol,
                                  const Vector* warm_start) {
  const int n = fm.n_states, na = fm.n_actions, q = fm.q();
  if (delta.size() != q) throw std::invalid_argument("lagrangian vi: delta arity mismatch");
  for (int l = 0; l < q; ++l)
    if (delta[l] > 1e-12) throw std::invalid_argument("lagrangian vi: delta must be nonpositive");

  Matrix c_delta = fm.c;
  for (int l = 0; l < q; ++l) c_delta -= delta[l] * fm.d[l];

  Vector u = warm_start ? *warm_start : Vector::Zero(n);
  Vector next(n), w(n);
  // Iterate gap below tol*(1-beta)/beta certifies a fixed-point error of tol.
  const double stop = tol * (1.0 - fm.beta) / fm.beta;
  for (long it = 0; it < 1000000; ++it) {
    next = c_delta.col(0) + fm.beta * (fm.p[0] * u);
    for (int a = 1; a < na; ++a) {
      w = c_delta.col(a) + fm.beta * (fm.p[a] * u);
      next = next.cwiseMin(w);
    }
    const double gap = (next - u).cwiseAbs().maxCoeff();
    u.swap(next);
    if (gap <= stop) return u;
  }
  throw std::runtime_error("lagrangian value iteration failed to converge");
}

double dual_value(const FiniteCMDP& fm, const Vector& delta, double tol,
                  const Vector* warm_start, Vector* fixed_point) {
  const Vector u = lagrangian_value_iteration(fm, delta, tol, warm_start);
  if (fixed_point) *fixed_point = u;
  return (1.0 - fm.beta) * fm.gamma.dot(u) + fm.k.dot(delta);
}

DualSweepResult dual_function_sweep(const FiniteCMDP& fm, double K_bound, int grid_pts,
                                    double tol) {
  const int q = fm.q();
  if (q < 1) throw std::invalid_argument("dual sweep: no constraints to sweep");
  if (grid_pts < 1 || K_bound < 0.0) throw std::invalid_argument("dual sweep: bad grid");

  DualSweepResult best;
  best.delta_star = Vector::Zero(q);
  best.g_max = -std::numeric_limits<double>::infinity();
  const double h = K_bound / grid_pts;
  Vector warm = Vector::Zero(fm.n_states);

  // Enumerate lattice points of {delta <= 0, ||delta||_1 <= K} recursively.
  Vector delta = Vector::Zero(q);
  std::function<void(int, int)> rec = [&](int l, int remaining) {
    if (l == q) {
      Vector u;
      const double g = dual_value(fm, delta, tol, &warm, &u);
      warm = u;
      ++best.evaluations;
      if (g > best.g_max) {
        best.g_max = g;
        best.delta_star = delta;
      }
      return;
    }
    for (int s = 0; s <= remaining; ++s) {
      delta[l] = -s * h;
      rec(l + 1, remaining - s);
    }
    delta[l] = 0.0;
  };
  rec(0, grid_pts);
  return best;
}

double dual_reference_value(const FiniteCMDP& fm, double K_bound, double tol) {
  const int q = fm.q();
  if (q == 0) {
    return dual_value(fm, Vector(), tol);
  }
  Vector warm = Vector::Zero(fm.n_states);
  auto eval1 = [&](double d) {
    Vector delta = Vector::Constant(1, d);
    Vector u;
    const double g = dual_value(fm, delta, tol, &warm, &u);
    warm = u;
    return g;
  };
  if (q == 1) {
    // Golden-section maximization of the concave dual on [-K, 0].
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = -K_bound, b = 0.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval1(x1), f2 = eval1(x2);
    while (b - a > std::max(1e-9, 1e-7 * K_bound)) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = eval1(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = eval1(x1);
      }
    }
    return std::max({f1, f2, eval1(0.0)});
  }
  // Coordinate ascent with per-coordinate golden sections.
  Vector delta = Vector::Zero(q);
  double best = dual_value(fm, delta, tol, &warm, &warm);
  for (int round = 0; round < 6; ++round) {
    for (int l = 0; l < q; ++l) {
      const double budget = K_bound - (delta.lpNorm<1>() - std::abs(delta[l]));
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = -budget, b = 0.0;
      auto evalc = [&](double v) {
        Vector d2 = delta;
        d2[l] = v;
        Vector u;
        const double g = dual_value(fm, d2, tol, &warm, &u);
        warm = u;
        return g;
      };
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = evalc(x1), f2 = evalc(x2);
      while (b - a > std::max(1e-8, 1e-6 * K_bound)) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          f2 = evalc(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          f1 = evalc(x1);
        }
      }
      delta[l] = f1 > f2 ? x1 : x2;
      best = std::max(best, std::max(f1, f2));
    }
  }
  return best;
}

}  // namespace cmdp
