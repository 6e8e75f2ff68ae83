#pragma once

#include "cmdp/discounted.hpp"

namespace cmdp {

struct StationaryOccupation {
  Matrix zeta;      // n_states x n_actions, total mass one
  Vector marginal;  // invariant state marginal

  double mass() const { return zeta.sum(); }
  /// || sum_a zeta(.,a) - sum_{i,a} p(.|i,a) zeta(i,a) ||_inf
  double flow_residual(const FiniteCMDP& fm) const;
};

struct ErgodicityCertificate {
  double R = 2.0;
  double kappa_erg = 0.0;
  bool degenerate = false;
  std::string note;
};

struct MinorizationReport {
  bool pass = false;
  bool degenerate = false;  // lambda identically zero: vacuous bound
  double worst_violation = 0.0;  // max over (i,a,j) of lambda_j phi(i,a) - p(j|i,a)
  double worst_phi_gap = 0.0;    // max over (i,a) of (1 - alpha_min) - phi(i,a)
  int offender_state = -1, offender_action = -1, offender_target = -1;
  std::string detail;
};

/// Verify the quantized minorization p_n(j|i,a) >= lambda_n(j) phi_n(i,a) and
/// phi_n >= 1 - alpha_min, both up to tol.
MinorizationReport check_minorization_finite(const FiniteCMDP& fm, double tol);

struct AverageSolution {
  double value = 0.0;  // rho*
  StationaryOccupation occupation;
  StationaryPolicy policy;
  Vector h;       // relative value from LP duals (gauge h[0] = 0)
  double delta0 = 0.0;
  Vector delta;   // q nonpositive multipliers
  LPSolution lp;
};

/// Stationary-occupation LP for the constrained average-cost problem.
LinearProgram build_stationary_lp(const FiniteCMDP& fm);

AverageSolution solve_average(const FiniteCMDP& fm, const LPOptions& opts = {});

/// Invariant distribution of the chain induced by a randomized stationary
/// policy; direct linear solve, residual checked to 1e-11.
Vector stationary_distribution(const FiniteCMDP& fm, const StationaryPolicy& policy);
Vector stationary_distribution(const Matrix& P);

/// Doeblin constants implied by whole-space minorization with
/// phi >= 1 - alpha_min: TV decay R kappa^t with R = 2, kappa = alpha_min.
ErgodicityCertificate doeblin_constants(double alpha_min);

struct RviResult {
  double rho = 0.0;
  Vector h;
  long iterations = 0;
  double span_residual = 0.0;
};

/// Relative value iteration for the delta-Lagrangian average-cost problem;
/// h anchored at state 0, stops when the ACOE residual is below tol.
RviResult relative_value_iteration(const FiniteCMDP& fm, const Vector& delta, double tol,
                                   const Vector* warm_start = nullptr);

/// Average-cost dual functional rho*_delta + <k, delta>.
double average_dual_value(const FiniteCMDP& fm, const Vector& delta, double tol,
                          const Vector* warm_start = nullptr, Vector* h_out = nullptr);

/// Dual optimum over {delta <= 0, ||delta||_1 <= K_bound}; reference-value
/// path for large grids (strong duality under minorization).
double average_dual_reference_value(const FiniteCMDP& fm, double K_bound, double tol = 1e-9);

}  // namespace cmdp
