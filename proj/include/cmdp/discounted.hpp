#pragma once

#include "cmdp/lp.hpp"
#include "cmdp/quantize.hpp"

namespace cmdp {

struct StationaryPolicy {
  Matrix prob;  // n_states x n_actions, rows stochastic

  int n_states() const { return static_cast<int>(prob.rows()); }
  int n_actions() const { return static_cast<int>(prob.cols()); }
  void validate() const;
  static StationaryPolicy uniform(int n, int a) {
    return StationaryPolicy{Matrix::Constant(n, a, 1.0 / a)};
  }
  static StationaryPolicy deterministic(const std::vector<int>& act, int n_actions);
};

struct OccupationMeasure {
  Matrix zeta;      // n_states x n_actions
  Vector marginal;  // row sums

  double mass() const { return zeta.sum(); }
  /// || marginal - (1-beta) gamma - beta p' zeta ||_inf
  double balance_residual(const FiniteCMDP& fm) const;
};

struct DualCertificate {
  Vector u;
  Vector delta;  // q nonpositive multipliers
  double objective = 0.0;
  double max_violation = 0.0;  // worst breach of u <= c - delta.d + beta p u
};

struct DiscountedSolution {
  double value = 0.0;
  OccupationMeasure occupation;
  StationaryPolicy policy;
  DualCertificate dual;
  LPSolution lp;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Occupation-measure LP of the finite discounted problem: variables
/// zeta(i,a) and one slack per constraint, balance rows plus constraint rows.
LinearProgram build_occupation_lp(const FiniteCMDP& fm);

/// Solve the finite constrained discounted problem; disintegrate the optimal
/// occupation measure into a randomized stationary policy and map LP duals to
/// the (u, delta) certificate. Throws InfeasibleError when the constraints
/// cannot be met at this grid.
DiscountedSolution solve_discounted(const FiniteCMDP& fm, const LPOptions& opts = {});

/// Fixed point of the Lagrangian Bellman operator for multipliers delta <= 0
/// (cost c - sum_l delta_l d_l), to sup-norm accuracy tol.
Vector lagrangian_value_iteration(const FiniteCMDP& fm, const Vector& delta, double tol,
                                  const Vector* warm_start = nullptr);

/// Dual functional G_n(delta) = (1-beta) <gamma, u*_delta> + <k, delta>.
double dual_value(const FiniteCMDP& fm, const Vector& delta, double tol,
                  const Vector* warm_start = nullptr, Vector* fixed_point = nullptr);

struct DualSweepResult {
  Vector delta_star;
  double g_max = 0.0;
  long evaluations = 0;
};

/// Maximize G_n over the lattice {delta <= 0, ||delta||_1 <= K_bound} with
/// grid_pts steps per unit simplex direction. Diagnostic lower bound on the
/// LP value by weak duality.
DualSweepResult dual_function_sweep(const FiniteCMDP& fm, double K_bound, int grid_pts,
                                    double tol = 1e-10);

/// Dual optimum via golden-section search (q = 1) or coordinate ascent
/// (q >= 2). Equals the primal LP value by strong duality; used as the
/// reference-value path for grids too large for the dense simplex.
double dual_reference_value(const FiniteCMDP& fm, double K_bound, double tol = 1e-9);

}  // namespace cmdp
