#include "cmdp/evaluate.hpp"

#include <cmath>

namespace cmdp {

namespace {

// Acklam's rational approximation of the standard normal quantile, refined by
// one Halley step; plenty for confidence multipliers.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double u = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1);
  } else if (p <= phigh) {
    const double u = p - 0.5, r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double u = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1);
  }
  const double e = norm_cdf(x) - p;
  const double g = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
  return x - e / g;
}

Matrix policy_kernel(const FiniteCMDP& fm, const StationaryPolicy& policy) {
  Matrix P = Matrix::Zero(fm.n_states, fm.n_states);
  for (int a = 0; a < fm.n_actions; ++a) P += policy.prob.col(a).asDiagonal() * fm.p[a];
  return P;
}

Vector mix_cost(const Matrix& table, const StationaryPolicy& policy) {
  return (table.array() * policy.prob.array()).rowwise().sum();
}

struct RunningStats {
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace

FiniteEval exact_eval_finite(const FiniteCMDP& fm, const StationaryPolicy& policy,
                             Criterion criterion) {
  if (policy.n_states() != fm.n_states || policy.n_actions() != fm.n_actions)
    throw std::invalid_argument("exact_eval_finite: policy shape mismatch");
  FiniteEval out;
  out.constraints.resize(fm.q());
  const Matrix P = policy_kernel(fm, policy);
  if (criterion == Criterion::discounted) {
    const Matrix A = Matrix::Identity(fm.n_states, fm.n_states) - fm.beta * P;
    const auto lu = A.partialPivLu();
    const Vector v = lu.solve((1.0 - fm.beta) * mix_cost(fm.c, policy));
    out.value = fm.gamma.dot(v);
    for (int l = 0; l < fm.q(); ++l)
      out.constraints[l] = fm.gamma.dot(lu.solve((1.0 - fm.beta) * mix_cost(fm.d[l], policy)));
  } else {
    const Vector mu = stationary_distribution(fm, policy);
    out.value = mu.dot(mix_cost(fm.c, policy));
    for (int l = 0; l < fm.q(); ++l) out.constraints[l] = mu.dot(mix_cost(fm.d[l], policy));
  }
  return out;
}

namespace {

EvaluationReport mc_eval_impl(const ContinuousCMDP& model, const PolicyRule& rule,
                              Criterion criterion, const McParams& mc, double sup_c_hint) {
  if (mc.horizon < 1 || mc.replications < 1)
    throw std::invalid_argument("mc_eval: horizon >= 1 and replications >= 1 required");
  const int q = model.cost.q();
  EvaluationReport rep;
  rep.criterion = criterion;
  rep.horizon = mc.horizon;
  rep.replications = mc.replications;
  rep.burn_in = criterion == Criterion::average ? mc.burn_in : 0;
  rep.seed = mc.seed;
  rep.confidence = mc.confidence;
  rep.k = model.cost.k;

  RunningStats vstats;
  std::vector<RunningStats> cstats(q);
  const double beta = model.cost.beta;

  for (long repl = 0; repl < mc.replications; ++repl) {
    Rng rng(mc.seed, static_cast<std::uint64_t>(repl) + 1);
    Vector x = model.cost.gamma_sampler(rng);
    double v_acc = 0.0;
    Vector c_acc = Vector::Zero(q);
    double disc = 1.0;
    long counted = 0;
    for (long t = 0; t <= mc.horizon; ++t) {
      const int ai = rule(x, rng);
      const Vector a = model.actions.action(ai);
      if (criterion == Criterion::discounted) {
        v_acc += disc * model.cost.c(x, a);
        for (int l = 0; l < q; ++l) c_acc[l] += disc * model.cost.d[l](x, a);
        disc *= beta;
      } else if (t >= rep.burn_in) {
        v_acc += model.cost.c(x, a);
        for (int l = 0; l < q; ++l) c_acc[l] += model.cost.d[l](x, a);
        ++counted;
      }
      if (t < mc.horizon) x = model.transition.sampler(x, a, rng);
    }
    if (criterion == Criterion::discounted) {
      vstats.add((1.0 - beta) * v_acc);
      for (int l = 0; l < q; ++l) cstats[l].add((1.0 - beta) * c_acc[l]);
    } else {
      if (counted == 0) throw std::invalid_argument("mc_eval: burn_in consumed the horizon");
      vstats.add(v_acc / counted);
      for (int l = 0; l < q; ++l) cstats[l].add(c_acc[l] / counted);
    }
  }

  const double z = normal_quantile(0.5 + mc.confidence / 2.0);
  rep.value = vstats.mean();
  rep.value_ci = z * vstats.se();
  rep.constraints.resize(q);
  rep.constraint_ci.resize(q);
  rep.feasible.resize(q);
  const double z_one_sided = normal_quantile(mc.confidence);
  for (int l = 0; l < q; ++l) {
    rep.constraints[l] = cstats[l].mean();
    rep.constraint_ci[l] = z * cstats[l].se();
    rep.feasible[l] =
        rep.constraints[l] + z_one_sided * cstats[l].se() <= model.cost.k[l];
  }
  rep.bias_bound = criterion == Criterion::discounted
                       ? std::pow(beta, static_cast<double>(mc.horizon + 1)) * sup_c_hint
                       : 0.0;
  return rep;
}

}  // namespace

EvaluationReport mc_eval_original(const ContinuousCMDP& model, const ExtendedPolicy& policy,
                                  Criterion criterion, const McParams& mc) {
  const double sup_c = model.cost.sup_c > 0 ? model.cost.sup_c : 1.0;
  return mc_eval_impl(
      model, [&policy](const Vector& x, Rng& rng) { return policy.sample_action(x, rng); },
      criterion, mc, sup_c);
}

EvaluationReport mc_eval_rule(const ContinuousCMDP& model, const PolicyRule& rule,
                              Criterion criterion, const McParams& mc) {
  const double sup_c = model.cost.sup_c > 0 ? model.cost.sup_c : 1.0;
  return mc_eval_impl(model, rule, criterion, mc, sup_c);
}

SlaterEstimate estimate_slater(const ContinuousCMDP& model, const PolicyRule& witness,
                               Criterion criterion, const McParams& mc) {
  const EvaluationReport rep = mc_eval_rule(model, witness, criterion, mc);
  SlaterEstimate est;
  est.alpha_hat = model.cost.k - rep.constraints;
  est.ci = rep.constraint_ci;
  est.strict = true;
  for (int l = 0; l < est.alpha_hat.size(); ++l) {
    if (rep.constraints[l] + rep.constraint_ci[l] >= model.cost.k[l]) {
      est.strict = false;
      est.message = "witness policy not demonstrably strict on constraint " + std::to_string(l);
    }
  }
  return est;
}

SlaterEstimate estimate_slater(const ContinuousCMDP& model, Criterion criterion,
                               const McParams& mc) {
  if (model.reg.witness_action < 0 || model.reg.witness_action >= model.actions.count())
    throw std::invalid_argument("estimate_slater: model declares no witness policy");
  const int wa = model.reg.witness_action;
  return estimate_slater(
      model, [wa](const Vector&, Rng&) { return wa; }, criterion, mc);
}

TvReport tstep_tv_discrepancy(const ContinuousCMDP& model, const Grid& grid,
                              const ExtendedPolicy& policy, int t, const McParams& mc,
                              long bins) {
  if (t < 0) throw std::invalid_argument("tstep_tv_discrepancy: t >= 0");
  TvReport rep;
  rep.t = t;
  rep.bins = bins;

  // Reference partition: uniform bins over the first axis (product over axes
  // would explode; the first-axis projection already lower-bounds TV).
  const double lo = model.space.lower[0], hi = model.space.upper[0];
  Vector hist_p = Vector::Zero(bins), hist_r = Vector::Zero(bins);
  auto bin_of = [&](const Vector& x) {
    long b = static_cast<long>((x[0] - lo) / (hi - lo) * bins);
    return std::clamp(b, 0L, bins - 1);
  };

  for (long repl = 0; repl < mc.replications; ++repl) {
    // Common random numbers: both chains consume the identical stream.
    Rng rng_p(mc.seed, 2 * repl + 1);
    Rng rng_r(mc.seed, 2 * repl + 1);
    Rng rng_cell(Rng::mix(mc.seed, 0x7ce11), repl + 1);
    Vector xp = model.cost.gamma_sampler(rng_p);
    Vector xr = model.cost.gamma_sampler(rng_r);
    for (int s = 0; s < t; ++s) {
      {
        const int ai = policy.sample_action(xp, rng_p);
        xp = model.transition.sampler(xp, model.actions.action(ai), rng_p);
      }
      {
        // Surrogate step: resample the cell representative from nu, then step
        // with the original kernel.
        const int cell = quantize_point(grid, xr);
        const Vector node_lo = grid.cell_lo(cell), node_hi = grid.cell_hi(cell);
        Vector z(grid.dim());
        for (int ax = 0; ax < grid.dim(); ++ax)
          z[ax] = node_lo[ax] + rng_cell.uniform01() * (node_hi[ax] - node_lo[ax]);
        const int ai = policy.sample_action(xr, rng_r);
        xr = model.transition.sampler(z, model.actions.action(ai), rng_r);
      }
    }
    hist_p[bin_of(xp)] += 1.0;
    hist_r[bin_of(xr)] += 1.0;
  }
  hist_p /= static_cast<double>(mc.replications);
  hist_r /= static_cast<double>(mc.replications);
  rep.tv_lower = 0.5 * (hist_p - hist_r).cwiseAbs().sum();

  if (model.reg.G_p > 0.0) {
    rep.bound = static_cast<double>(t) * model.reg.G_p * 2.0 * grid.alpha_cov() *
                std::pow(1.0 / grid.size(), 1.0 / grid.dim());
  }
  return rep;
}

}  // namespace cmdp
