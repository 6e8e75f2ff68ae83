#pragma once

#include "cmdp/common.hpp"

namespace cmdp {

/// Equality-form linear program: minimize objective . z subject to
/// eq_matrix z = eq_rhs and z >= 0.
struct LinearProgram {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  std::vector<std::string> labels;  // optional variable names

  int rows() const { return static_cast<int>(eq_matrix.rows()); }
  int cols() const { return static_cast<int>(eq_matrix.cols()); }
  void validate() const;
};

enum class LPStatus { optimal, infeasible, unbounded, iteration_limit };

struct LPOptions {
  double feas_tol = 1e-9;
  double ratio_tol = 1e-7;
  std::int64_t max_iters = 0;  // 0 = scale with problem size
};

struct LPSolution {
  LPStatus status = LPStatus::infeasible;
  Vector primal;
  Vector dual;  // one multiplier per equality row
  double objective = 0.0;
  int farkas_row = -1;  // infeasible: row index of the certificate
  Vector ray;           // unbounded: improving direction
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double comp_slack = 0.0;
  double duality_gap = 0.0;
  std::int64_t iterations = 0;
};

/// Two-phase dense-tableau primal simplex with Bland's anti-cycling rule.
/// Optimal solutions carry a certified primal/dual pair.
LPSolution solve_lp(const LinearProgram& lp, const LPOptions& opts = {});

/// Plain-text standard form for external cross-checking.
std::string dump_lp(const LinearProgram& lp);

}  // namespace cmdp
