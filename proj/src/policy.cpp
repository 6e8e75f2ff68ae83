#include "cmdp/policy.hpp"

#include "cmdp/evaluate.hpp"

#include <cmath>

namespace cmdp {

ExtendedPolicy extend_policy(const StationaryPolicy& policy, const Grid& grid) {
  if (policy.n_states() != grid.size())
    throw std::invalid_argument("extend_policy: policy indexed by a different grid");
  policy.validate();
  return ExtendedPolicy{policy, grid};
}

std::pair<ExtendedPolicy, PerturbReport> perturbed_solve(const ContinuousCMDP& model,
                                                         const Grid& grid, double eps,
                                                         Criterion criterion,
                                                         const FiniteCMDP* prebuilt) {
  if (eps < 0.0) throw std::invalid_argument("perturbed_solve: eps must be nonnegative");
  FiniteCMDP fm = prebuilt ? *prebuilt : build_finite_model(model, grid);
  fm.k.array() -= eps;
  if (fm.k.minCoeff() <= 0.0)
    throw InfeasibleError("grid too coarse for this eps (perturbed constraint nonpositive)");

  PerturbReport rep;
  rep.criterion = criterion;
  rep.eps = eps;
  rep.n_states = fm.n_states;
  rep.quad_defect = fm.quad_defect;

  StationaryPolicy pol;
  try {
    if (criterion == Criterion::discounted) {
      DiscountedSolution sol = solve_discounted(fm);
      rep.finite_value = sol.value;
      pol = sol.policy;
    } else {
      AverageSolution sol = solve_average(fm);
      rep.finite_value = sol.value;
      pol = sol.policy;
    }
  } catch (const InfeasibleError&) {
    throw InfeasibleError("grid too coarse for this eps");
  }
  rep.finite_constraints = exact_eval_finite(fm, pol, criterion).constraints;
  return {extend_policy(pol, grid), rep};
}

EpsChoice choose_eps(double kappa_target, const RateConstants& rc, Criterion criterion) {
  if (!(kappa_target > 0.0)) throw std::invalid_argument("choose_eps: kappa must be positive");
  EpsChoice out;
  out.cap = criterion == Criterion::discounted ? rc.alpha_slater_min
                                               : 0.5 * rc.alpha_slater_min;
  out.eps = kappa_target / (3.0 * rc.K());
  if (out.eps >= out.cap) {
    out.eps = out.cap * (1.0 - 1e-9);
    out.clipped = true;
  }
  return out;
}

EscalationResult escalate_solve(const ContinuousCMDP& model, double eps, Criterion criterion,
                                int start_resolution, int resolution_cap, int cell_nodes,
                                const McParams& mc, double build_tol) {
  if (start_resolution < 1 || resolution_cap < start_resolution)
    throw std::invalid_argument("escalate_solve: bad resolution range");
  EscalationResult out;
  const int dim = model.space.dim();
  for (long r = start_resolution; r <= resolution_cap; r *= 2) {
    EscalationStep step;
    step.resolution = r;
    const Grid grid = build_grid(model.space, IVector::Constant(dim, static_cast<int>(r)),
                                 cell_nodes);
    step.n_states = grid.size();
    try {
      const FiniteCMDP fm = build_finite_model(model, grid, build_tol);
      auto [pol, rep] = perturbed_solve(model, grid, eps, criterion, &fm);
      step.finite_value = rep.finite_value;
      McParams mcr = mc;
      mcr.seed = Rng::mix(mc.seed, static_cast<std::uint64_t>(r));
      const EvaluationReport ev = mc_eval_original(model, pol, criterion, mcr);
      step.mc_constraints.resize(model.cost.q());
      step.margins.resize(model.cost.q());
      bool ok = true;
      for (int l = 0; l < model.cost.q(); ++l) {
        step.mc_constraints[l] = ev.constraints[l] + ev.constraint_ci[l];
        step.margins[l] = model.cost.k[l] - step.mc_constraints[l];
        ok = ok && ev.feasible[l];
      }
      step.feasible = ok;
      out.steps.push_back(step);
      if (ok) {
        out.policy = pol;
        out.report = rep;
        out.success = true;
        return out;
      }
    } catch (const InfeasibleError&) {
      step.feasible = false;
      out.steps.push_back(step);
    }
  }
  return out;  // success = false: caller decides how to report
}

}  // namespace cmdp
