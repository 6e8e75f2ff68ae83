#pragma once

#include "cmdp/evaluate.hpp"
#include "cmdp/model_io.hpp"

#include <vector>

// Shared fixtures and independent oracles for the test suites. Oracle code
// here deliberately re-derives everything from first principles (dense
// solves, power iteration, exhaustive policy grids) and never calls into the
// solver paths it is used to check.
namespace cmdpt {

using namespace cmdp;

// Fixed 2-state / 2-action constrained model with an active constraint.
inline FiniteCMDP make_toy2() {
  FiniteCMDP fm;
  fm.n_states = 2;
  fm.n_actions = 2;
  fm.beta = 0.5;
  fm.p.resize(2);
  fm.p[0].resize(2, 2);
  fm.p[0] << 0.9, 0.1, 0.2, 0.8;
  fm.p[1].resize(2, 2);
  fm.p[1] << 0.3, 0.7, 0.6, 0.4;
  fm.c.resize(2, 2);
  fm.c << 1.0, 0.2, 0.8, 0.3;
  fm.d.assign(1, Matrix(2, 2));
  fm.d[0] << 0.1, 0.8, 0.2, 0.7;
  fm.k = Vector::Constant(1, 0.4);
  fm.gamma = Vector::Constant(2, 0.5);
  // Whole-space minorization read off the transition tables.
  fm.lambda.resize(2);
  fm.lambda << 2.0 / 3.0, 1.0 / 3.0;
  fm.phi = Matrix::Constant(2, 2, 0.3);
  fm.alpha_min = 0.7;
  fm.validate();
  return fm;
}

// Exact policy evaluation, independent of evaluate.cpp: dense LU for the
// discounted case, damped power iteration for the stationary distribution.
inline Matrix policy_kernel_oracle(const FiniteCMDP& fm, const Matrix& prob) {
  Matrix P = Matrix::Zero(fm.n_states, fm.n_states);
  for (int a = 0; a < fm.n_actions; ++a)
    for (int i = 0; i < fm.n_states; ++i) P.row(i) += prob(i, a) * fm.p[a].row(i);
  return P;
}

inline Vector stationary_oracle(const Matrix& P, double tol = 1e-13) {
  const int n = static_cast<int>(P.rows());
  Vector mu = Vector::Constant(n, 1.0 / n);
  for (long it = 0; it < 2000000; ++it) {
    Vector next = 0.5 * mu + 0.5 * (P.transpose() * mu);
    const double gap = (next - mu).cwiseAbs().maxCoeff();
    mu = next;
    if (gap < tol) break;
  }
  return mu / mu.sum();
}

struct OracleEval {
  double value = 0.0;
  Vector constraints;
};

inline OracleEval eval_policy_oracle(const FiniteCMDP& fm, const Matrix& prob,
                                     Criterion criterion) {
  OracleEval out;
  out.constraints.resize(fm.q());
  const Matrix P = policy_kernel_oracle(fm, prob);
  auto mix = [&](const Matrix& table) {
    return Vector((table.array() * prob.array()).rowwise().sum());
  };
  if (criterion == Criterion::discounted) {
    const auto lu = (Matrix::Identity(fm.n_states, fm.n_states) - fm.beta * P).partialPivLu();
    out.value = fm.gamma.dot(Vector(lu.solve((1.0 - fm.beta) * mix(fm.c))));
    for (int l = 0; l < fm.q(); ++l)
      out.constraints[l] = fm.gamma.dot(Vector(lu.solve((1.0 - fm.beta) * mix(fm.d[l]))));
  } else {
    const Vector mu = stationary_oracle(P);
    out.value = mu.dot(mix(fm.c));
    for (int l = 0; l < fm.q(); ++l) out.constraints[l] = mu.dot(mix(fm.d[l]));
  }
  return out;
}

// All action distributions on a step-1/steps lattice of the simplex.
inline std::vector<Vector> simplex_grid(int na, int steps) {
  std::vector<Vector> out;
  Vector cur = Vector::Zero(na);
  std::function<void(int, int)> rec = [&](int a, int remaining) {
    if (a == na - 1) {
      cur[a] = static_cast<double>(remaining) / steps;
      out.push_back(cur);
      return;
    }
    for (int s = 0; s <= remaining; ++s) {
      cur[a] = static_cast<double>(s) / steps;
      rec(a + 1, remaining - s);
    }
  };
  rec(0, steps);
  return out;
}

struct BruteForceResult {
  double value = std::numeric_limits<double>::infinity();
  Matrix argmin;
  bool any_feasible = false;
};

// Exhaustive minimum over the policy lattice, exact evaluation per policy.
inline BruteForceResult brute_force_policy_grid(const FiniteCMDP& fm, int steps,
                                                Criterion criterion) {
  const auto dists = simplex_grid(fm.n_actions, steps);
  const long per_state = static_cast<long>(dists.size());
  long total = 1;
  for (int i = 0; i < fm.n_states; ++i) {
    total *= per_state;
    if (total > 200000000L) throw std::runtime_error("brute force grid too large");
  }
  BruteForceResult best;
  Matrix prob(fm.n_states, fm.n_actions);
  for (long code = 0; code < total; ++code) {
    long rem = code;
    for (int i = 0; i < fm.n_states; ++i) {
      prob.row(i) = dists[rem % per_state].transpose();
      rem /= per_state;
    }
    const OracleEval ev = eval_policy_oracle(fm, prob, criterion);
    bool feasible = true;
    for (int l = 0; l < fm.q(); ++l) feasible = feasible && ev.constraints[l] <= fm.k[l] + 1e-12;
    if (!feasible) continue;
    best.any_feasible = true;
    if (ev.value < best.value) {
      best.value = ev.value;
      best.argmin = prob;
    }
  }
  return best;
}

inline Matrix random_stochastic_matrix(Rng& rng, int n, double minor_w, const Vector& lambda) {
  Matrix P(n, n);
  for (int i = 0; i < n; ++i) {
    Vector row(n);
    for (int j = 0; j < n; ++j) row[j] = -std::log(std::max(rng.uniform01(), 1e-300));
    row /= row.sum();
    P.row(i) = ((1.0 - minor_w) * row + minor_w * lambda).transpose();
  }
  return P;
}

inline Vector random_distribution(Rng& rng, int n) {
  Vector v(n);
  for (int j = 0; j < n; ++j) v[j] = -std::log(std::max(rng.uniform01(), 1e-300));
  return v / v.sum();
}

// Random finite constrained MDP; minor_w > 0 blends a whole-space
// minorization component lambda into every row (alpha_min = 1 - minor_w).
inline FiniteCMDP random_fcmdp(Rng& rng, int n, int na, int q, double beta,
                               double minor_w = 0.0) {
  FiniteCMDP fm;
  fm.n_states = n;
  fm.n_actions = na;
  fm.beta = beta;
  const Vector lambda = random_distribution(rng, n);
  for (int a = 0; a < na; ++a) fm.p.push_back(random_stochastic_matrix(rng, n, minor_w, lambda));
  fm.c.resize(n, na);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < na; ++a) fm.c(i, a) = rng.uniform01();
  for (int l = 0; l < q; ++l) {
    Matrix dl(n, na);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < na; ++a) dl(i, a) = rng.uniform01();
    fm.d.push_back(dl);
  }
  fm.gamma = random_distribution(rng, n);
  fm.k = Vector::Constant(q, 1.0);  // placeholder; force_feasible_k overwrites
  if (minor_w > 0.0) {
    fm.lambda = lambda;
    fm.phi = Matrix::Constant(n, na, minor_w);
    fm.alpha_min = 1.0 - minor_w;
  }
  fm.validate();
  return fm;
}

// Anchor k at the constraint cost of a random policy plus a margin drawn from
// [margin_lo, margin_hi]; that policy certifies feasibility by construction.
inline Matrix force_feasible_k(FiniteCMDP& fm, Rng& rng, double margin_lo, double margin_hi,
                               Criterion criterion) {
  Matrix prob(fm.n_states, fm.n_actions);
  for (int i = 0; i < fm.n_states; ++i) prob.row(i) = random_distribution(rng, fm.n_actions);
  const OracleEval ev = eval_policy_oracle(fm, prob, criterion);
  for (int l = 0; l < fm.q(); ++l)
    fm.k[l] = ev.constraints[l] + rng.uniform(margin_lo, margin_hi);
  return prob;
}

inline ContinuousCMDP make_unit_gauss_model(double sigma = 0.2, double beta = 0.5) {
  StateSpace space{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
  ActionGrid actions;
  actions.actions.resize(2, 1);
  actions.actions << 0.0, 0.5;
  CostSpec costs;
  costs.c = [](const Vector& x, const Vector& a) { return x[0] + 0.1 * a[0]; };
  costs.d.push_back([](const Vector& x, const Vector&) { return 1.0 - x[0]; });
  costs.k = Vector::Constant(1, 0.6);
  costs.beta = beta;
  costs.gamma_density = [](const Vector&) { return 1.0; };
  costs.gamma_sampler = [](Rng& rng) { return Vector::Constant(1, rng.uniform01()); };
  NoiseSpec noise;
  noise.sigma = Vector::Constant(1, sigma);
  return make_additive_noise(
      space, actions,
      [](const Vector& x, const Vector& a) {
        return Vector::Constant(1, std::clamp(x[0] + a[0] - 0.25, 0.0, 1.0));
      },
      noise, costs);
}

}  // namespace cmdpt
