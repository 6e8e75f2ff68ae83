#pragma once

#include "cmdp/policy.hpp"

namespace cmdp {

struct FiniteEval {
  double value = 0.0;
  Vector constraints;
};

/// Exact policy evaluation on a finite model: discounted values by direct
/// linear solve of (I - beta P_phi) v = (1-beta) g_phi, averages through the
/// invariant distribution.
FiniteEval exact_eval_finite(const FiniteCMDP& fm, const StationaryPolicy& policy,
                             Criterion criterion);

struct EvaluationReport {
  Criterion criterion = Criterion::discounted;
  double value = 0.0;
  double value_ci = 0.0;  // confidence half-width
  Vector constraints;
  Vector constraint_ci;
  double bias_bound = 0.0;  // discounted truncation tail beta^(T+1) sup_g
  long horizon = 0;
  long replications = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
  double confidence = 0.0;
  std::vector<bool> feasible;  // per constraint: upper confidence bound <= k_l
  Vector k;
};

/// Seeded Monte Carlo evaluation of a policy on the original model.
/// Replications are independent streams derived from (seed, replication).
EvaluationReport mc_eval_original(const ContinuousCMDP& model, const ExtendedPolicy& policy,
                                  Criterion criterion, const McParams& mc);

/// Same estimator driven by an arbitrary stationary rule (used for witness
/// policies).
using PolicyRule = std::function<int(const Vector&, Rng&)>;
EvaluationReport mc_eval_rule(const ContinuousCMDP& model, const PolicyRule& rule,
                              Criterion criterion, const McParams& mc);

struct SlaterEstimate {
  Vector alpha_hat;  // k_l - estimated witness constraint cost
  Vector ci;         // half-widths
  bool strict = false;
  std::string message;
};

/// Estimate the Slater slack vector from the declared witness policy; errors
/// when the witness is not demonstrably strict at the configured confidence.
SlaterEstimate estimate_slater(const ContinuousCMDP& model, Criterion criterion,
                               const McParams& mc);
SlaterEstimate estimate_slater(const ContinuousCMDP& model, const PolicyRule& witness,
                               Criterion criterion, const McParams& mc);

struct TvReport {
  long t = 0;
  double tv_lower = 0.0;  // binned half-L1 lower bound
  double bound = std::numeric_limits<double>::quiet_NaN();  // t G_p 2 alpha (1/n)^(1/d)
  long bins = 0;
};

/// Compare the t-step laws of the original chain and the surrogate chain
/// under a common extended policy, with common random numbers; reports a
/// binned total-variation lower bound next to the declared-rate upper bound.
TvReport tstep_tv_discrepancy(const ContinuousCMDP& model, const Grid& grid,
                              const ExtendedPolicy& policy, int t, const McParams& mc,
                              long bins = 256);

}  // namespace cmdp
