#include "cmdp/rates.hpp"

#include <cmath>

namespace cmdp {

RateConstants derive_rate_constants(const ContinuousCMDP& model, const Grid& grid,
                                    double measured_alpha_slater_min) {
  RateConstants rc;
  rc.dim = model.space.dim();
  rc.q = model.cost.q();
  rc.beta = model.cost.beta;
  rc.alpha_cov = grid.alpha_cov();
  rc.K_c = model.reg.K_c;
  rc.K_l = model.reg.K_l.size() == rc.q ? model.reg.K_l : Vector::Zero(rc.q);
  rc.K_p = model.reg.K_p;
  rc.G_p = model.reg.G_p;

  double sup_c_est;
  Vector sup_d_est;
  estimate_sup_norms(model, grid, sup_c_est, sup_d_est);
  rc.sup_c = model.cost.sup_c > 0.0 ? model.cost.sup_c : sup_c_est;
  rc.sup_d = sup_d_est;
  for (int l = 0; l < rc.q; ++l)
    if (model.cost.sup_d.size() == rc.q && model.cost.sup_d[l] > 0.0)
      rc.sup_d[l] = model.cost.sup_d[l];

  if (measured_alpha_slater_min > 0.0)
    rc.alpha_slater_min = measured_alpha_slater_min;
  else if (model.reg.alpha_slater.size() > 0)
    rc.alpha_slater_min = model.reg.alpha_slater.minCoeff();

  if (model.reg.alpha_min > 0.0 && model.reg.alpha_min < 1.0) {
    rc.R = 2.0;
    rc.kappa_erg = model.reg.alpha_min;
  }
  return rc;
}

double rate_Y_v(const RateConstants& rc) {
  if (!(rc.beta * rc.K_p < 1.0))
    throw std::invalid_argument("discounted rate: requires beta * K_p < 1");
  const double constrained = rc.q > 0 ? rc.q * rc.K() * rc.K_l_max() : 0.0;
  return 4.0 * rc.alpha_cov * (rc.K_c + constrained) / (1.0 - rc.beta * rc.K_p);
}

double discounted_value_bound(long n, const RateConstants& rc) {
  if (n < 1) throw std::invalid_argument("discounted_value_bound: n >= 1");
  return rate_Y_v(rc) * std::pow(1.0 / static_cast<double>(n), 1.0 / rc.dim);
}

double rate_H_g(const RateConstants& rc, double K_g, double sup_g) {
  return (K_g + sup_g * rc.G_p / (1.0 - rc.beta)) * 2.0 * rc.alpha_cov;
}

double policy_eval_bound(long n, const RateConstants& rc, double K_g, double sup_g) {
  if (n < 1) throw std::invalid_argument("policy_eval_bound: n >= 1");
  return rate_H_g(rc, K_g, sup_g) * std::pow(1.0 / static_cast<double>(n), 1.0 / rc.dim);
}

Threshold grid_threshold_discounted(double kappa_target, const RateConstants& rc, double H_c,
                                    double H_l_max) {
  if (!(kappa_target > 0.0))
    throw std::invalid_argument("grid_threshold_discounted: kappa must be positive");
  const double yv = rate_Y_v(rc);
  double worst = std::pow(3.0 * yv / kappa_target, rc.dim);
  worst = std::max(worst, std::pow(3.0 * H_c / kappa_target, rc.dim));
  if (rc.q > 0)
    worst = std::max(worst, std::pow(3.0 * H_l_max * rc.K() / kappa_target, rc.dim));
  Threshold th;
  th.n = static_cast<long>(std::ceil(worst - 1e-12));
  th.n = std::max(th.n, 1L);
  th.eps = rc.q > 0 ? kappa_target / (3.0 * rc.K()) : 0.0;
  return th;
}

EpsCurves average_eps_curves_real(double n, const RateConstants& rc) {
  if (!(n >= 1.0)) throw std::invalid_argument("average_eps_curves: n >= 1");
  if (!(rc.kappa_erg > 0.0 && rc.kappa_erg < 1.0))
    throw std::invalid_argument("average_eps_curves: kappa_erg in (0,1) required");
  if (!(rc.G_p > 0.0))
    throw std::invalid_argument("average_eps_curves: G_p required");
  const double s = std::pow(1.0 / n, 1.0 / rc.dim);
  const double logk = std::log(1.0 / rc.kappa_erg);

  EpsCurves out;
  out.t_prime = std::log(std::pow(n, 1.0 / rc.dim) / rc.I4()) / logk;
  long t = static_cast<long>(std::ceil(out.t_prime - 1e-12));
  if (t < 1) {
    t = 1;
    out.clamped = true;
  }
  out.t_used = t;
  auto curve = [&](double i1, double i2, double i3, double t_star) {
    long tt = static_cast<long>(std::ceil(t_star - 1e-12));
    if (tt < 1) tt = 1;
    return i1 * std::pow(rc.kappa_erg, static_cast<double>(tt)) + i2 * s +
           i3 * s * static_cast<double>(tt);
  };
  out.eps_c = curve(rc.I1(), rc.I2(), rc.I3(), out.t_prime);
  out.eps_dl.resize(rc.q);
  for (int l = 0; l < rc.q; ++l) {
    const double tp = std::log(std::pow(n, 1.0 / rc.dim) / rc.I4l(l)) / logk;
    out.eps_dl[l] = curve(rc.I1l(l), rc.I2l(l), rc.I3l(l), tp);
  }
  out.eps_max = rc.q > 0 ? out.eps_dl.maxCoeff() : 0.0;
  return out;
}

EpsCurves average_eps_curves(long n, const RateConstants& rc) {
  return average_eps_curves_real(static_cast<double>(n), rc);
}

double average_value_bound(long n, const RateConstants& rc) {
  const EpsCurves ec = average_eps_curves(n, rc);
  if (!(ec.eps_max < 0.5 * rc.alpha_slater_min))
    throw std::runtime_error("grid too coarse for average-cost bound (eps_max " +
                             format_double(ec.eps_max) + " vs slack/2 " +
                             format_double(0.5 * rc.alpha_slater_min) + ")");
  return 2.0 * ec.eps_c + (4.0 * rc.sup_c / rc.alpha_slater_min) * ec.eps_max;
}

Threshold grid_threshold_average(double kappa_target, const RateConstants& rc, long cap) {
  if (!(kappa_target > 0.0))
    throw std::invalid_argument("grid_threshold_average: kappa must be positive");
  const double big_k = rc.K();
  auto satisfied = [&](long n) {
    const EpsCurves ec = average_eps_curves(n, rc);
    return kappa_target / 3.0 >= 2.0 * ec.eps_c + std::max(2.0 * big_k, 1.0) * ec.eps_max;
  };
  long hi = 1;
  while (!satisfied(hi)) {
    if (hi >= cap) {
      const EpsCurves ec = average_eps_curves(cap, rc);
      const double rhs = 2.0 * ec.eps_c + std::max(2.0 * big_k, 1.0) * ec.eps_max;
      throw std::runtime_error("grid_threshold_average: no admissible n up to cap " +
                               std::to_string(cap) + " (gap " +
                               format_double(rhs - kappa_target / 3.0) + ")");
    }
    hi = std::min(hi * 2, cap);
  }
  long lo = hi / 2;  // hi satisfies, lo (if >= 1) does not
  while (hi - lo > 1 && lo >= 1) {
    const long mid = lo + (hi - lo) / 2;
    if (mid < 1) break;
    if (satisfied(mid))
      hi = mid;
    else
      lo = mid;
  }
  Threshold th;
  th.n = hi;
  th.eps = kappa_target / (3.0 * big_k);
  return th;
}

}  // namespace cmdp
