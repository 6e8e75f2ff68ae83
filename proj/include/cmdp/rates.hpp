#pragma once

#include "cmdp/quantize.hpp"

namespace cmdp {

/// Everything the explicit convergence-rate bounds consume. Entries left at
/// zero mean "not available"; bound evaluators refuse to run without the
/// constants they need.
struct RateConstants {
  int dim = 1;
  int q = 0;
  double beta = 0.0;
  double alpha_cov = 0.0;       // covering coefficient of the grid family
  double K_c = 0.0;
  Vector K_l;
  double K_p = 0.0;
  double G_p = 0.0;
  double sup_c = 0.0;
  Vector sup_d;
  double alpha_slater_min = 0.0;
  double R = 2.0;
  double kappa_erg = 0.0;

  double K() const {
    if (!(alpha_slater_min > 0.0))
      throw std::invalid_argument("rate constants: Slater slack unavailable");
    return 2.0 * sup_c / alpha_slater_min;
  }
  double K_l_max() const { return q > 0 ? K_l.maxCoeff() : 0.0; }
  double I1() const { return 2.0 * sup_c * R; }
  double I2() const { return 2.0 * K_c * alpha_cov; }
  double I3() const { return 2.0 * sup_c * G_p * alpha_cov; }
  double I4() const { return I3() / (I1() * std::log(1.0 / kappa_erg)); }
  double I1l(int l) const { return 2.0 * sup_d[l] * R; }
  double I2l(int l) const { return 2.0 * K_l[l] * alpha_cov; }
  double I3l(int l) const { return 2.0 * sup_d[l] * G_p * alpha_cov; }
  double I4l(int l) const { return I3l(l) / (I1l(l) * std::log(1.0 / kappa_erg)); }
};

/// Pull constants from the declared model regularity plus grid geometry.
/// Sup norms use declared bounds when present, otherwise the node estimates;
/// a measured Slater slack overrides the declared one when positive.
RateConstants derive_rate_constants(const ContinuousCMDP& model, const Grid& grid,
                                    double measured_alpha_slater_min = 0.0);

/// Y_v = 4 alpha (K_c + q K K_l) / (1 - beta K_p).
double rate_Y_v(const RateConstants& rc);

/// Theorem-level discounted value bound Y_v (1/n)^(1/dim); n is the grid
/// cardinality.
double discounted_value_bound(long n, const RateConstants& rc);

/// H_g = (K_g + ||g|| G_p / (1 - beta)) 2 alpha.
double rate_H_g(const RateConstants& rc, double K_g, double sup_g);

/// Policy-evaluation bound H_g (1/n)^(1/dim) on |finite eval - true eval| of
/// an extended policy.
double policy_eval_bound(long n, const RateConstants& rc, double K_g, double sup_g);

struct Threshold {
  long n = 0;
  double eps = 0.0;
};

/// Smallest admissible cardinality for a target accuracy kappa (discounted),
/// paired with eps = kappa / (3K).
Threshold grid_threshold_discounted(double kappa_target, const RateConstants& rc, double H_c,
                                    double H_l_max);

struct EpsCurves {
  double eps_c = 0.0;
  Vector eps_dl;
  double eps_max = 0.0;
  double t_prime = 0.0;
  long t_used = 1;
  bool clamped = false;  // t' <= 0 at this n; bound evaluated at t = 1
};

/// The average-cost uniform approximation curves at cardinality n, evaluated
/// at the integer step count ceil(t'(n)).
EpsCurves average_eps_curves(long n, const RateConstants& rc);
EpsCurves average_eps_curves_real(double n, const RateConstants& rc);

/// Average value bound 2 eps_c(n) + (4||c||/alpha) eps_max(n); requires
/// eps_max(n) < alpha_slater_min / 2.
double average_value_bound(long n, const RateConstants& rc);

/// Smallest n with kappa/3 >= 2 eps_c(n) + max(2K, 1) eps_max(n), by doubling
/// then bisection; throws when no n up to cap qualifies.
Threshold grid_threshold_average(double kappa_target, const RateConstants& rc,
                                 long cap = (1L << 22));

}  // namespace cmdp
