#pragma once

#include "cmdp/average.hpp"
#include "cmdp/rates.hpp"

namespace cmdp {

/// Piecewise-constant extension of a finite-model policy: the action
/// distribution at x is the base row of the cell owning x.
struct ExtendedPolicy {
  StationaryPolicy base;
  Grid grid;

  Vector action_distribution(const Vector& x) const {
    return base.prob.row(quantize_point(grid, x)).transpose();
  }
  int sample_action(const Vector& x, Rng& rng) const {
    return rng.categorical(action_distribution(x));
  }
  std::uint64_t digest() const {
    Digest dg;
    dg.add(static_cast<std::int64_t>(grid.digest()));
    dg.add(base.prob);
    return dg.value();
  }
};

ExtendedPolicy extend_policy(const StationaryPolicy& policy, const Grid& grid);

struct PerturbReport {
  Criterion criterion = Criterion::discounted;
  double eps = 0.0;
  long n_states = 0;
  double finite_value = 0.0;
  Vector finite_constraints;  // exact constraint costs of the finite optimum
  double quad_defect = 0.0;
};

/// Solve the criterion problem with the constraint vector tightened to
/// k - eps. Throws InfeasibleError("grid too coarse for this eps") when the
/// perturbed program has no feasible point at this grid.
std::pair<ExtendedPolicy, PerturbReport> perturbed_solve(const ContinuousCMDP& model,
                                                         const Grid& grid, double eps,
                                                         Criterion criterion,
                                                         const FiniteCMDP* prebuilt = nullptr);

struct EpsChoice {
  double eps = 0.0;
  bool clipped = false;
  double cap = 0.0;
};

/// eps = kappa / (3K), clipped below the Slater cap (min slack for the
/// discounted criterion, half of it for the average one).
EpsChoice choose_eps(double kappa_target, const RateConstants& rc, Criterion criterion);

struct EscalationStep {
  long resolution = 0;
  long n_states = 0;
  bool feasible = false;
  Vector mc_constraints;  // upper confidence bounds
  Vector margins;         // k - upper bound
  double finite_value = 0.0;
};

struct EscalationResult {
  ExtendedPolicy policy;
  PerturbReport report;
  std::vector<EscalationStep> steps;
  bool success = false;
};

struct McParams {
  long horizon = 200;
  long replications = 2000;
  long burn_in = 100;
  std::uint64_t seed = 1;
  double confidence = 0.99;
};

/// Empirical fallback when rate constants are unavailable or the threshold
/// blows past the solvable range: double the grid until the eps-perturbed
/// problem is feasible and the extended policy's Monte Carlo constraint
/// margins are positive at the configured confidence.
EscalationResult escalate_solve(const ContinuousCMDP& model, double eps, Criterion criterion,
                                int start_resolution, int resolution_cap, int cell_nodes,
                                const McParams& mc, double build_tol = 1e-6);

}  // namespace cmdp
