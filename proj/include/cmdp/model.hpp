#pragma once

#include "cmdp/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cmdp {

/// Compact box state space in R^dim.
struct StateSpace {
  Vector lower, upper;

  int dim() const { return static_cast<int>(lower.size()); }
  Vector widths() const { return upper - lower; }
  bool contains(const Vector& x, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
    return true;
  }
  void validate() const;
};

/// Finite set of admissible actions (points in R^m).
struct ActionGrid {
  Matrix actions;  // one action per row

  int count() const { return static_cast<int>(actions.rows()); }
  Vector action(int a) const { return actions.row(a).transpose(); }
  void validate() const;
};

using StateFn = std::function<double(const Vector&)>;
using StateActionFn = std::function<double(const Vector&, const Vector&)>;
// (y, x, a) -> transition density value f(y | x, a)
using DensityFn = std::function<double(const Vector&, const Vector&, const Vector&)>;
using SampleFn = std::function<Vector(const Vector&, const Vector&, Rng&)>;
// (lo, hi, x, a) -> exact mass of the axis box [lo, hi] under p(.|x,a)
using CellMassFn = std::function<double(const Vector&, const Vector&, const Vector&, const Vector&)>;
using InitialSampleFn = std::function<Vector(Rng&)>;

struct TransitionSpec {
  DensityFn density;
  SampleFn sampler;
  CellMassFn cell_mass;  // optional; quadrature fallback when absent
};

struct CostSpec {
  StateActionFn c;
  std::vector<StateActionFn> d;
  Vector k;            // constraint levels, one per d_l
  double beta = 0.0;   // discount in (0,1)
  StateFn gamma_density;
  InitialSampleFn gamma_sampler;
  double sup_c = 0.0;  // declared sup-norm bound (0 = estimate from grid nodes)
  Vector sup_d;

  int q() const { return static_cast<int>(d.size()); }
};

/// Declared regularity constants. Zero-valued entries mean "not declared";
/// rate computations requiring them will refuse to run.
struct RegularityData {
  double K_c = 0.0;   // Lipschitz constant of c in x
  Vector K_l;         // Lipschitz constants of d_l in x
  double K_p = 0.0;   // Wasserstein-1 kernel modulus
  double G_p = 0.0;   // total-variation kernel modulus
  double alpha_min = 0.0;       // minorization: phi >= 1 - alpha_min
  StateActionFn phi;            // minorization weight
  StateFn lambda_density;       // minorization measure density
  Vector alpha_slater;          // declared Slater slacks
  int witness_action = -1;      // constant-action witness policy (-1 = none)
};

struct ContinuousCMDP {
  std::string family;       // builtin family id ("" for ad hoc models)
  std::string params_json;  // canonical parameter blob for round-trips
  StateSpace space;
  ActionGrid actions;
  TransitionSpec transition;
  CostSpec cost;
  RegularityData reg;

  std::uint64_t digest() const;
};

enum class CheckStatus { pass, warn, fail, unchecked, hard_error };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::unchecked;
  std::string detail;
  double worst = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool hard_errors() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::hard_error) return true;
    return false;
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::fail || c.status == CheckStatus::warn ||
          c.status == CheckStatus::hard_error)
        return false;
    return true;
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Numerical audit of the declared model structure: density normalization,
/// minorization, sampled Lipschitz ratios of costs and kernel. Structural
/// defects (bad box, k <= 0, beta outside (0,1)) are hard errors; assumption
/// violations are warnings.
ValidationReport validate_model(const ContinuousCMDP& model, double tol, std::uint64_t seed);

/// Additive-noise constructor: x_{t+1} = drift(x_t, a_t) + v_t with the result
/// renormalized to the state box. When noise.sigma is set the noise is
/// independent Gaussian per axis and box masses have closed form.
struct NoiseSpec {
  std::function<double(const Vector&)> density;  // density of v on R^dim
  std::function<Vector(Rng&)> sampler;
  Vector sigma;  // nonempty => v ~ N(0, diag(sigma^2)); enables erf masses
};

ContinuousCMDP make_additive_noise(const StateSpace& space, const ActionGrid& actions,
                                   std::function<Vector(const Vector&, const Vector&)> drift,
                                   NoiseSpec noise, CostSpec costs, RegularityData reg = {});

/// One-dimensional builtin family: linear costs, clipped-linear drift with
/// truncated Gaussian noise mixed with a uniform restart component. The
/// uniform weight is an exact whole-space minorization, so ergodic-rate
/// machinery applies with kappa = 1 - mix.
struct MixGauss1dParams {
  double lo = 0.0, hi = 1.0;          // state box
  std::vector<double> actions = {0.0, 0.25, 0.5};
  double drift0 = -0.3;               // H(x,a) = clip(x + a + drift0)
  double drift_x = 1.0;
  double drift_a = 1.0;
  double sigma = 0.4;
  double mix = 0.3;                   // uniform restart weight
  double beta = 0.4;
  double c0 = 0.0, c_x = 0.5, c_a = 0.1;
  std::vector<double> d0 = {0.5}, d_x = {-0.5}, d_a = {0.0};
  std::vector<double> k = {0.3};
  double gamma_lo = 0.4, gamma_hi = 1.0;
  // declared regularity
  double K_p = 1.0, G_p = 2.2;
  std::vector<double> alpha_slater = {0.1};
  int witness_action = 2;
};

ContinuousCMDP make_mix_gauss_1d(const MixGauss1dParams& p);

/// Calibrated instance of the family above used across examples and tests.
ContinuousCMDP make_inv1();

}  // namespace cmdp
