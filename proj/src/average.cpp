#include "cmdp/average.hpp"

#include <cmath>

namespace cmdp {

double StationaryOccupation::flow_residual(const FiniteCMDP& fm) const {
  Vector inflow = Vector::Zero(fm.n_states);
  for (int a = 0; a < fm.n_actions; ++a) inflow += fm.p[a].transpose() * zeta.col(a);
  return (zeta.rowwise().sum() - inflow).cwiseAbs().maxCoeff();
}

MinorizationReport check_minorization_finite(const FiniteCMDP& fm, double tol) {
  MinorizationReport rep;
  if (fm.phi.size() == 0 || fm.lambda.size() == 0) {
    rep.pass = false;
    rep.detail = "no quantized minorization data present";
    return rep;
  }
  if (fm.lambda.maxCoeff() <= 0.0) {
    rep.pass = true;
    rep.degenerate = true;
    rep.detail = "degenerate minorization: lambda_n vanishes, bound is vacuous";
    return rep;
  }
  for (int i = 0; i < fm.n_states; ++i)
    for (int a = 0; a < fm.n_actions; ++a) {
      const double gap = (1.0 - fm.alpha_min) - fm.phi(i, a);
      if (gap > rep.worst_phi_gap) rep.worst_phi_gap = gap;
      for (int j = 0; j < fm.n_states; ++j) {
        const double v = fm.lambda[j] * fm.phi(i, a) - fm.p[a](i, j);
        if (v > rep.worst_violation) {
          rep.worst_violation = v;
          rep.offender_state = i;
          rep.offender_action = a;
          rep.offender_target = j;
        }
      }
    }
  rep.pass = rep.worst_violation <= tol && rep.worst_phi_gap <= tol;
  if (!rep.pass)
    rep.detail = "minorization violated: worst cell gap " + format_double(rep.worst_violation) +
                 ", worst phi gap " + format_double(rep.worst_phi_gap);
  return rep;
}

LinearProgram build_stationary_lp(const FiniteCMDP& fm) {
  const int n = fm.n_states, na = fm.n_actions, q = fm.q();
  const int vars = n * na + q;
  LinearProgram lp;
  lp.objective = Vector::Zero(vars);
  lp.eq_matrix = Matrix::Zero(n + 1 + q, vars);
  lp.eq_rhs = Vector::Zero(n + 1 + q);
  lp.labels.reserve(vars);

  for (int i = 0; i < n; ++i)
    for (int a = 0; a < na; ++a) {
      const int col = i * na + a;
      lp.objective[col] = fm.c(i, a);
      lp.eq_matrix(i, col) += 1.0;
      for (int j = 0; j < n; ++j) lp.eq_matrix(j, col) -= fm.p[a](i, j);
      lp.eq_matrix(n, col) = 1.0;  // total mass
      for (int l = 0; l < q; ++l) lp.eq_matrix(n + 1 + l, col) = fm.d[l](i, a);
      lp.labels.push_back("zeta(" + std::to_string(i) + "," + std::to_string(a) + ")");
    }
  lp.eq_rhs[n] = 1.0;
  for (int l = 0; l < q; ++l) {
    lp.eq_matrix(n + 1 + l, n * na + l) = 1.0;
    lp.eq_rhs[n + 1 + l] = fm.k[l];
    lp.labels.push_back("alpha(" + std::to_string(l) + ")");
  }
  return lp;
}

AverageSolution solve_average(const FiniteCMDP& fm, const LPOptions& opts) {
  const int n = fm.n_states, na = fm.n_actions, q = fm.q();
  LPSolution sol = solve_lp(build_stationary_lp(fm), opts);
  if (sol.status == LPStatus::infeasible)
    throw InfeasibleError("constraints infeasible at this grid");
  if (sol.status != LPStatus::optimal)
    throw std::runtime_error("stationary occupation LP did not reach optimality");

  AverageSolution out;
  out.lp = sol;
  out.value = sol.objective;
  out.occupation.zeta.resize(n, na);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < na; ++a) out.occupation.zeta(i, a) = sol.primal[i * na + a];
  out.occupation.marginal = out.occupation.zeta.rowwise().sum();

  out.policy.prob.resize(n, na);
  for (int i = 0; i < n; ++i) {
    const double m = out.occupation.zeta.row(i).sum();
    if (m > 1e-12)
      out.policy.prob.row(i) = out.occupation.zeta.row(i) / m;
    else
      out.policy.prob.row(i).setConstant(1.0 / na);
  }

  out.h = sol.dual.head(n);
  out.h.array() -= out.h[0];  // flow duals carry an additive gauge
  out.delta0 = sol.dual[n];
  out.delta = sol.dual.tail(q);
  for (int l = 0; l < q; ++l) out.delta[l] = std::min(out.delta[l], 0.0);
  return out;
}

Vector stationary_distribution(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  // mu' (I - P) = 0 with one balance row replaced by normalization.
  Matrix M = (Matrix::Identity(n, n) - P).transpose();
  M.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs[n - 1] = 1.0;
  Vector mu = M.partialPivLu().solve(rhs);
  // Residual over the full system, normalization included.
  const Matrix F = (Matrix::Identity(n, n) - P).transpose();
  double res = (F * mu).cwiseAbs().maxCoeff();
  res = std::max(res, std::abs(mu.sum() - 1.0));
  if (!(res <= 1e-11) || mu.minCoeff() < -1e-9)
    throw std::runtime_error("chain not unichain at tolerance (residual " + format_double(res) +
                             ")");
  return mu.cwiseMax(0.0) / mu.cwiseMax(0.0).sum();
}

Vector stationary_distribution(const FiniteCMDP& fm, const StationaryPolicy& policy) {
  Matrix P = Matrix::Zero(fm.n_states, fm.n_states);
  for (int a = 0; a < fm.n_actions; ++a) P += policy.prob.col(a).asDiagonal() * fm.p[a];
  return stationary_distribution(P);
}

ErgodicityCertificate doeblin_constants(double alpha_min) {
  if (alpha_min <= 0.0 || alpha_min >= 1.0)
    throw std::invalid_argument("doeblin_constants: alpha_min must lie in (0,1)");
  ErgodicityCertificate cert;
  cert.R = 2.0;
  cert.kappa_erg = alpha_min;
  if (alpha_min > 1.0 - 1e-6) {
    cert.degenerate = true;
    cert.note = "kappa close to one: geometric bound degenerates";
  }
  return cert;
}

RviResult relative_value_iteration(const FiniteCMDP& fm, const Vector& delta, double tol,
                                   const Vector* warm_start) {
  const int n = fm.n_states, na = fm.n_actions, q = fm.q();
  if (delta.size() != q) throw std::invalid_argument("rvi: delta arity mismatch");
  for (int l = 0; l < q; ++l)
    if (delta[l] > 1e-12) throw std::invalid_argument("rvi: delta must be nonpositive");

  Matrix c_delta = fm.c;
  for (int l = 0; l < q; ++l) c_delta -= delta[l] * fm.d[l];

  Vector h = warm_start && warm_start->size() == n ? *warm_start : Vector::Zero(n);
  Vector Th(n), w(n);
  RviResult out;
  const long cap = 200000;
  for (long it = 1; it <= cap; ++it) {
    Th = c_delta.col(0) + fm.p[0] * h;
    for (int a = 1; a < na; ++a) {
      w = c_delta.col(a) + fm.p[a] * h;
      Th = Th.cwiseMin(w);
    }
    const Vector diff = Th - h;
    const double lo = diff.minCoeff(), hi = diff.maxCoeff();
    h = Th.array() - Th[0];
    if (hi - lo <= tol) {
      out.rho = 0.5 * (hi + lo);
      out.h = h;
      out.iterations = it;
      out.span_residual = hi - lo;
      return out;
    }
  }
  Th = c_delta.col(0) + fm.p[0] * h;
  for (int a = 1; a < na; ++a) Th = Th.cwiseMin((c_delta.col(a) + fm.p[a] * h).eval());
  throw std::runtime_error("relative value iteration did not converge; span " +
                           format_double(span(Th - h)));
}

double average_dual_value(const FiniteCMDP& fm, const Vector& delta, double tol,
                          const Vector* warm_start, Vector* h_out) {
  const RviResult r = relative_value_iteration(fm, delta, tol, warm_start);
  if (h_out) *h_out = r.h;
  return r.rho + fm.k.dot(delta);
}

double average_dual_reference_value(const FiniteCMDP& fm, double K_bound, double tol) {
  const int q = fm.q();
  if (q == 0) return average_dual_value(fm, Vector(), tol);
  Vector warm = Vector::Zero(fm.n_states);
  auto eval1 = [&](double d) {
    Vector delta = Vector::Constant(1, d);
    Vector h;
    const double g = average_dual_value(fm, delta, tol, &warm, &h);
    warm = h;
    return g;
  };
  if (q != 1)
    throw std::invalid_argument("average dual reference: implemented for q <= 1");
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

}  // namespace cmdp
