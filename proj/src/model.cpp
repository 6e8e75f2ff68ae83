#include "cmdp/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace cmdp {

namespace {

// Tensor Gauss-Legendre integral of g over an axis box (dim <= 2), seeded
// Monte Carlo above that. Only used for validation-time audits.
double box_integral(const StateSpace& space, const std::function<double(const Vector&)>& g,
                    std::uint64_t seed, int nodes_per_axis = 48) {
  const int d = space.dim();
  if (d <= 2) {
    Vector t, w;
    gauss_legendre(nodes_per_axis, t, w);
    const Vector lo = space.lower, wd = space.widths();
    if (d == 1) {
      double acc = 0.0;
      for (int i = 0; i < t.size(); ++i) {
        Vector y(1);
        y[0] = lo[0] + 0.5 * wd[0] * (t[i] + 1.0);
        acc += 0.5 * wd[0] * w[i] * g(y);
      }
      return acc;
    }
    double acc = 0.0;
    for (int i = 0; i < t.size(); ++i)
      for (int j = 0; j < t.size(); ++j) {
        Vector y(2);
        y[0] = lo[0] + 0.5 * wd[0] * (t[i] + 1.0);
        y[1] = lo[1] + 0.5 * wd[1] * (t[j] + 1.0);
        acc += 0.25 * wd[0] * wd[1] * w[i] * w[j] * g(y);
      }
    return acc;
  }
  Rng rng(seed, 0x90bd);
  const int n = 20000;
  double acc = 0.0;
  Vector y(d);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < d; ++i) y[i] = rng.uniform(space.lower[i], space.upper[i]);
    acc += g(y);
  }
  double vol = 1.0;
  for (int i = 0; i < d; ++i) vol *= space.upper[i] - space.lower[i];
  return acc * vol / n;
}

Vector sample_in_box(const StateSpace& space, Rng& rng) {
  Vector x(space.dim());
  for (int i = 0; i < space.dim(); ++i) x[i] = rng.uniform(space.lower[i], space.upper[i]);
  return x;
}

}  // namespace

void StateSpace::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw std::invalid_argument("state box: dimension mismatch");
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw std::invalid_argument("state box: bounds must be finite");
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("state box: lower must be strictly below upper");
  }
}

void ActionGrid::validate() const {
  if (actions.rows() == 0) throw std::invalid_argument("action grid: empty");
  for (int i = 0; i < count(); ++i)
    for (int j = i + 1; j < count(); ++j)
      if ((actions.row(i) - actions.row(j)).norm() == 0.0)
        throw std::invalid_argument("action grid: duplicate action");
}

std::uint64_t ContinuousCMDP::digest() const {
  Digest dg;
  dg.add(family);
  if (!params_json.empty()) {
    dg.add(params_json);
  } else {
    dg.add(space.lower);
    dg.add(space.upper);
    dg.add(actions.actions);
    dg.add(cost.k);
    dg.add(cost.beta);
  }
  return dg.value();
}

ValidationReport validate_model(const ContinuousCMDP& model, double tol, std::uint64_t seed) {
  ValidationReport rep;
  auto push = [&](std::string name, CheckStatus st, std::string detail, double worst = 0.0) {
    rep.checks.push_back({std::move(name), st, std::move(detail), worst});
  };

  // Structural gates.
  try {
    model.space.validate();
    push("box", CheckStatus::pass, "");
  } catch (const std::exception& e) {
    push("box", CheckStatus::hard_error, e.what());
    return rep;
  }
  try {
    model.actions.validate();
    push("actions", CheckStatus::pass, "");
  } catch (const std::exception& e) {
    push("actions", CheckStatus::hard_error, e.what());
    return rep;
  }
  if (model.cost.beta <= 0.0 || model.cost.beta >= 1.0) {
    push("discount", CheckStatus::hard_error, "discount out of range (0,1)");
  } else {
    push("discount", CheckStatus::pass, "");
  }
  bool k_ok = model.cost.k.size() == static_cast<Eigen::Index>(model.cost.d.size());
  for (int l = 0; l < model.cost.k.size() && k_ok; ++l)
    if (!(model.cost.k[l] > 0.0)) k_ok = false;
  push("constraint_vector", k_ok ? CheckStatus::pass : CheckStatus::hard_error,
       k_ok ? "" : "constraint vector must be positive with one entry per d_l");
  if (rep.hard_errors()) return rep;

  Rng rng(seed);
  const int pairs = 24;

  // Density normalization over sampled (x,a).
  if (model.transition.density) {
    double worst = 0.0;
    for (int s = 0; s < 8; ++s) {
      const Vector x = sample_in_box(model.space, rng);
      const Vector a = model.actions.action(static_cast<int>(rng.raw() % model.actions.count()));
      const double mass = box_integral(
          model.space, [&](const Vector& y) { return model.transition.density(y, x, a); },
          Rng::mix(seed, s));
      worst = std::max(worst, std::abs(mass - 1.0));
    }
    push("density_normalization", worst <= tol ? CheckStatus::pass : CheckStatus::warn,
         "max |integral f - 1| over sampled (x,a)", worst);
  } else {
    push("density_normalization", CheckStatus::unchecked, "no density evaluator");
  }

  // Nonnegativity of costs at sampled points.
  {
    double worst = 0.0;
    for (int s = 0; s < 64; ++s) {
      const Vector x = sample_in_box(model.space, rng);
      const Vector a = model.actions.action(static_cast<int>(rng.raw() % model.actions.count()));
      worst = std::min(worst, model.cost.c(x, a));
      for (const auto& dl : model.cost.d) worst = std::min(worst, dl(x, a));
    }
    push("cost_nonnegative", worst >= -tol ? CheckStatus::pass : CheckStatus::warn,
         "min sampled one-stage / constraint cost", worst);
  }

  // Minorization: phi >= 1 - alpha_min and cell mass >= lambda(C) phi(x,a).
  if (model.reg.phi && model.reg.lambda_density && model.reg.alpha_min > 0.0) {
    double worst_phi = 0.0;
    bool phi_ok = true;
    double worst_cell = 0.0;
    const int cells = 12;
    const StateSpace& sp = model.space;
    for (int s = 0; s < pairs; ++s) {
      const Vector x = sample_in_box(sp, rng);
      const Vector a = model.actions.action(static_cast<int>(rng.raw() % model.actions.count()));
      const double phi = model.reg.phi(x, a);
      if (phi < 1.0 - model.reg.alpha_min - tol) {
        phi_ok = false;
        worst_phi = std::max(worst_phi, (1.0 - model.reg.alpha_min) - phi);
      }
      if (sp.dim() == 1 && model.transition.density) {
        const double w = sp.widths()[0] / cells;
        for (int ci = 0; ci < cells; ++ci) {
          Vector lo(1), hi(1);
          lo[0] = sp.lower[0] + ci * w;
          hi[0] = lo[0] + w;
          double pm;
          if (model.transition.cell_mass) {
            pm = model.transition.cell_mass(lo, hi, x, a);
          } else {
            StateSpace cell{lo, hi};
            pm = box_integral(cell, [&](const Vector& y) { return model.transition.density(y, x, a); },
                              Rng::mix(seed, 1000 + ci), 16);
          }
          StateSpace cell{lo, hi};
          const double lm = box_integral(cell, model.reg.lambda_density, Rng::mix(seed, 2000 + ci), 16);
          worst_cell = std::max(worst_cell, lm * phi - pm);
        }
      }
    }
    const bool ok = phi_ok && worst_cell <= tol;
    push("minorization", ok ? CheckStatus::pass : CheckStatus::warn,
         phi_ok ? "max lambda(C) phi - p(C|x,a) over sampled cells"
                : "phi drops below 1 - alpha_min",
         phi_ok ? worst_cell : worst_phi);
  } else {
    push("minorization", CheckStatus::unchecked, "no minorization data declared");
  }

  // Sampled Lipschitz ratios. The measured worst ratio is always reported so
  // callers can calibrate constants; status reflects the declared bound.
  {
    double worst_c = 0.0;
    Vector worst_d = Vector::Zero(model.cost.q());
    for (int s = 0; s < 2 * pairs; ++s) {
      const Vector x = sample_in_box(model.space, rng);
      Vector xp = sample_in_box(model.space, rng);
      if (s % 2 == 0) xp = x + 0.05 * (xp - x);  // include nearby pairs
      const double dist = (x - xp).norm();
      if (dist < 1e-12) continue;
      for (int ai = 0; ai < model.actions.count(); ++ai) {
        const Vector a = model.actions.action(ai);
        worst_c = std::max(worst_c, std::abs(model.cost.c(x, a) - model.cost.c(xp, a)) / dist);
        for (int l = 0; l < model.cost.q(); ++l)
          worst_d[l] = std::max(worst_d[l],
                                std::abs(model.cost.d[l](x, a) - model.cost.d[l](xp, a)) / dist);
      }
    }
    if (model.reg.K_c > 0.0)
      push("cost_lipschitz", worst_c <= model.reg.K_c + tol ? CheckStatus::pass : CheckStatus::warn,
           "max sampled |c(x,a)-c(x',a)| / d(x,x')", worst_c);
    else
      push("cost_lipschitz", CheckStatus::unchecked, "K_c not declared", worst_c);
    double worst_rel = 0.0;
    bool dl_ok = true;
    for (int l = 0; l < model.cost.q(); ++l) {
      if (model.reg.K_l.size() == model.cost.q() && model.reg.K_l[l] > 0.0 &&
          worst_d[l] > model.reg.K_l[l] + tol)
        dl_ok = false;
      worst_rel = std::max(worst_rel, worst_d[l]);
    }
    if (model.reg.K_l.size() == model.cost.q() && model.cost.q() > 0)
      push("constraint_lipschitz", dl_ok ? CheckStatus::pass : CheckStatus::warn,
           "max sampled constraint-cost ratio", worst_rel);
    else
      push("constraint_lipschitz", CheckStatus::unchecked, "K_l not declared", worst_rel);
  }

  // Kernel total-variation modulus (L1 distance of densities).
  if (model.transition.density && model.space.dim() <= 2) {
    double worst = 0.0;
    for (int s = 0; s < pairs; ++s) {
      const Vector x = sample_in_box(model.space, rng);
      Vector xp = sample_in_box(model.space, rng);
      if (s % 2 == 0) xp = x + 0.05 * (xp - x);
      const double dist = (x - xp).norm();
      if (dist < 1e-12) continue;
      const Vector a = model.actions.action(static_cast<int>(rng.raw() % model.actions.count()));
      const double tv = box_integral(
          model.space,
          [&](const Vector& y) {
            return std::abs(model.transition.density(y, x, a) - model.transition.density(y, xp, a));
          },
          Rng::mix(seed, 3000 + s));
      worst = std::max(worst, tv / dist);
    }
    if (model.reg.G_p > 0.0)
      push("kernel_tv_lipschitz", worst <= model.reg.G_p + tol ? CheckStatus::pass : CheckStatus::warn,
           "max sampled TV(p(.|x,a), p(.|x',a)) / d(x,x')", worst);
    else
      push("kernel_tv_lipschitz", CheckStatus::unchecked, "G_p not declared", worst);
  } else {
    push("kernel_tv_lipschitz", CheckStatus::unchecked, "needs density and dim <= 2");
  }

  // Kernel Wasserstein-1 modulus via CDF differences (dim 1 only).
  if (model.transition.density && model.space.dim() == 1) {
    double worst = 0.0;
    const double lo = model.space.lower[0], hi = model.space.upper[0];
    const int grid = 256;
    const double h = (hi - lo) / grid;
    for (int s = 0; s < pairs; ++s) {
      const Vector x = sample_in_box(model.space, rng);
      Vector xp = sample_in_box(model.space, rng);
      if (s % 2 == 0) xp = x + 0.05 * (xp - x);
      const double dist = (x - xp).norm();
      if (dist < 1e-12) continue;
      const Vector a = model.actions.action(static_cast<int>(rng.raw() % model.actions.count()));
      double Fx = 0.0, Fxp = 0.0, w1 = 0.0;
      for (int g = 0; g < grid; ++g) {
        Vector y(1);
        y[0] = lo + (g + 0.5) * h;
        Fx += model.transition.density(y, x, a) * h;
        Fxp += model.transition.density(y, xp, a) * h;
        w1 += std::abs(Fx - Fxp) * h;
      }
      worst = std::max(worst, w1 / dist);
    }
    if (model.reg.K_p > 0.0)
      push("kernel_w1_lipschitz", worst <= model.reg.K_p + tol ? CheckStatus::pass : CheckStatus::warn,
           "max sampled W1(p(.|x,a), p(.|x',a)) / d(x,x')", worst);
    else
      push("kernel_w1_lipschitz", CheckStatus::unchecked, "K_p not declared", worst);
  } else {
    push("kernel_w1_lipschitz", CheckStatus::unchecked, "needs density and dim == 1");
  }

  if (model.reg.K_p > 0.0) {
    const double prod = model.cost.beta * model.reg.K_p;
    push("beta_Kp", prod < 1.0 ? CheckStatus::pass : CheckStatus::warn,
         "beta * K_p must stay below 1 for discounted rate bounds", prod);
  }

  push("slater", CheckStatus::unchecked, "use estimate_slater with the witness policy");
  return rep;
}

ContinuousCMDP make_additive_noise(const StateSpace& space, const ActionGrid& actions,
                                   std::function<Vector(const Vector&, const Vector&)> drift,
                                   NoiseSpec noise, CostSpec costs, RegularityData reg) {
  space.validate();
  actions.validate();
  if (noise.sigma.size() > 0) {
    if (noise.sigma.size() != space.dim())
      throw std::invalid_argument("additive noise: sigma dimension mismatch");
    for (int i = 0; i < noise.sigma.size(); ++i)
      if (!(noise.sigma[i] > 0.0))
        throw std::invalid_argument("additive noise: noise must have a density (sigma > 0)");
  } else if (!noise.density || !noise.sampler) {
    throw std::invalid_argument("additive noise: need either sigma or density+sampler");
  }

  ContinuousCMDP model;
  model.space = space;
  model.actions = actions;
  model.cost = std::move(costs);
  model.reg = std::move(reg);

  const StateSpace sp = space;
  const Vector sigma = noise.sigma;

  if (sigma.size() > 0) {
    // Truncated Gaussian with closed-form normalization and box masses.
    auto z_axis = [sp, sigma](const Vector& mean, int i) {
      return norm_cdf((sp.upper[i] - mean[i]) / sigma[i]) -
             norm_cdf((sp.lower[i] - mean[i]) / sigma[i]);
    };
    model.transition.density = [sp, sigma, drift, z_axis](const Vector& y, const Vector& x,
                                                          const Vector& a) {
      if (!sp.contains(y)) return 0.0;
      const Vector m = drift(x, a);
      double f = 1.0;
      for (int i = 0; i < sp.dim(); ++i) {
        const double z = z_axis(m, i);
        const double t = (y[i] - m[i]) / sigma[i];
        f *= std::exp(-0.5 * t * t) / (sigma[i] * std::sqrt(2.0 * M_PI) * z);
      }
      return f;
    };
    model.transition.cell_mass = [sp, sigma, drift, z_axis](const Vector& lo, const Vector& hi,
                                                            const Vector& x, const Vector& a) {
      const Vector m = drift(x, a);
      double mass = 1.0;
      for (int i = 0; i < sp.dim(); ++i) {
        const double l = std::max(lo[i], sp.lower[i]);
        const double h = std::min(hi[i], sp.upper[i]);
        if (h <= l) return 0.0;
        mass *= (norm_cdf((h - m[i]) / sigma[i]) - norm_cdf((l - m[i]) / sigma[i])) / z_axis(m, i);
      }
      return mass;
    };
    model.transition.sampler = [sp, sigma, drift](const Vector& x, const Vector& a, Rng& rng) {
      const Vector m = drift(x, a);
      Vector y(sp.dim());
      for (int i = 0; i < sp.dim(); ++i) {
        int attempts = 0;
        do {
          y[i] = m[i] + sigma[i] * rng.normal();
          if (++attempts > 100000)
            throw std::runtime_error("additive noise sampler: rejection cap exceeded");
        } while (y[i] < sp.lower[i] || y[i] > sp.upper[i]);
      }
      return y;
    };
  } else {
    auto nd = noise.density;
    auto ns = noise.sampler;
    model.transition.density = [sp, nd, drift](const Vector& y, const Vector& x, const Vector& a) {
      if (!sp.contains(y)) return 0.0;
      const Vector m = drift(x, a);
      const double raw = nd(y - m);
      // Normalization by quadrature over the box.
      double z = 0.0;
      const int g = 128;
      if (sp.dim() == 1) {
        const double h = sp.widths()[0] / g;
        for (int i = 0; i < g; ++i) {
          Vector yy(1);
          yy[0] = sp.lower[0] + (i + 0.5) * h;
          z += nd(yy - m) * h;
        }
      } else {
        throw std::runtime_error("generic additive noise density: only dim 1 supported");
      }
      return raw / z;
    };
    model.transition.sampler = [sp, ns, drift](const Vector& x, const Vector& a, Rng& rng) {
      const Vector m = drift(x, a);
      for (int attempts = 0; attempts < 100000; ++attempts) {
        const Vector y = m + ns(rng);
        if (sp.contains(y)) return y;
      }
      throw std::runtime_error("additive noise sampler: rejection cap exceeded");
    };
  }
  return model;
}

ContinuousCMDP make_mix_gauss_1d(const MixGauss1dParams& p) {
  if (!(p.sigma > 0.0)) throw std::invalid_argument("mix_gauss_1d: sigma must be positive");
  if (p.mix < 0.0 || p.mix >= 1.0) throw std::invalid_argument("mix_gauss_1d: mix in [0,1)");
  if (!(p.hi > p.lo)) throw std::invalid_argument("mix_gauss_1d: empty box");
  const int q = static_cast<int>(p.k.size());
  if (static_cast<int>(p.d0.size()) != q || static_cast<int>(p.d_x.size()) != q ||
      static_cast<int>(p.d_a.size()) != q)
    throw std::invalid_argument("mix_gauss_1d: constraint coefficient arity mismatch");

  ContinuousCMDP model;
  model.family = "mix_gauss_1d";
  {
    nlohmann::json j;
    j["lo"] = p.lo;
    j["hi"] = p.hi;
    j["actions"] = p.actions;
    j["drift0"] = p.drift0;
    j["drift_x"] = p.drift_x;
    j["drift_a"] = p.drift_a;
    j["sigma"] = p.sigma;
    j["mix"] = p.mix;
    j["beta"] = p.beta;
    j["c0"] = p.c0;
    j["c_x"] = p.c_x;
    j["c_a"] = p.c_a;
    j["d0"] = p.d0;
    j["d_x"] = p.d_x;
    j["d_a"] = p.d_a;
    j["k"] = p.k;
    j["gamma_lo"] = p.gamma_lo;
    j["gamma_hi"] = p.gamma_hi;
    j["K_p"] = p.K_p;
    j["G_p"] = p.G_p;
    j["alpha_slater"] = p.alpha_slater;
    j["witness_action"] = p.witness_action;
    model.params_json = j.dump();
  }

  model.space.lower = Vector::Constant(1, p.lo);
  model.space.upper = Vector::Constant(1, p.hi);
  model.actions.actions.resize(static_cast<Eigen::Index>(p.actions.size()), 1);
  for (std::size_t i = 0; i < p.actions.size(); ++i) model.actions.actions(i, 0) = p.actions[i];

  const double lo = p.lo, hi = p.hi, width = p.hi - p.lo;
  const double sigma = p.sigma, mix = p.mix;
  auto drift = [p](double x, double a) {
    return std::clamp(p.drift0 + p.drift_x * x + p.drift_a * a, p.lo, p.hi);
  };
  auto z_of = [lo, hi, sigma](double m) {
    return norm_cdf((hi - m) / sigma) - norm_cdf((lo - m) / sigma);
  };

  model.transition.density = [=](const Vector& y, const Vector& x, const Vector& a) {
    if (y[0] < lo || y[0] > hi) return 0.0;
    const double m = drift(x[0], a[0]);
    const double t = (y[0] - m) / sigma;
    const double g = std::exp(-0.5 * t * t) / (sigma * std::sqrt(2.0 * M_PI) * z_of(m));
    return mix / width + (1.0 - mix) * g;
  };
  model.transition.cell_mass = [=](const Vector& clo, const Vector& chi, const Vector& x,
                                   const Vector& a) {
    const double l = std::max(clo[0], lo), h = std::min(chi[0], hi);
    if (h <= l) return 0.0;
    const double m = drift(x[0], a[0]);
    const double g = (norm_cdf((h - m) / sigma) - norm_cdf((l - m) / sigma)) / z_of(m);
    return mix * (h - l) / width + (1.0 - mix) * g;
  };
  model.transition.sampler = [=](const Vector& x, const Vector& a, Rng& rng) {
    Vector y(1);
    if (rng.uniform01() < mix) {
      y[0] = rng.uniform(lo, hi);
      return y;
    }
    const double m = drift(x[0], a[0]);
    for (int attempts = 0; attempts < 100000; ++attempts) {
      y[0] = m + sigma * rng.normal();
      if (y[0] >= lo && y[0] <= hi) return y;
    }
    throw std::runtime_error("mix_gauss_1d sampler: rejection cap exceeded");
  };

  model.cost.c = [p](const Vector& x, const Vector& a) {
    return p.c0 + p.c_x * x[0] + p.c_a * a[0];
  };
  for (int l = 0; l < q; ++l) {
    const double d0 = p.d0[l], dx = p.d_x[l], da = p.d_a[l];
    model.cost.d.push_back(
        [d0, dx, da](const Vector& x, const Vector& a) { return d0 + dx * x[0] + da * a[0]; });
  }
  model.cost.k = Eigen::Map<const Vector>(p.k.data(), q);
  model.cost.beta = p.beta;
  const double glo = p.gamma_lo, ghi = p.gamma_hi;
  model.cost.gamma_density = [glo, ghi](const Vector& x) {
    return (x[0] >= glo && x[0] <= ghi) ? 1.0 / (ghi - glo) : 0.0;
  };
  model.cost.gamma_sampler = [glo, ghi](Rng& rng) {
    Vector x(1);
    x[0] = rng.uniform(glo, ghi);
    return x;
  };
  // Linear costs: exact sup norms over box corners and actions.
  auto lin_sup = [&](double b0, double bx, double ba) {
    double best = -1e300;
    for (double xv : {p.lo, p.hi})
      for (double av : p.actions) best = std::max(best, b0 + bx * xv + ba * av);
    return best;
  };
  model.cost.sup_c = lin_sup(p.c0, p.c_x, p.c_a);
  model.cost.sup_d.resize(q);
  for (int l = 0; l < q; ++l) model.cost.sup_d[l] = lin_sup(p.d0[l], p.d_x[l], p.d_a[l]);

  model.reg.K_c = std::abs(p.c_x);
  model.reg.K_l.resize(q);
  for (int l = 0; l < q; ++l) model.reg.K_l[l] = std::abs(p.d_x[l]);
  model.reg.K_p = p.K_p;
  model.reg.G_p = p.G_p;
  model.reg.alpha_min = 1.0 - mix;
  model.reg.phi = [mix](const Vector&, const Vector&) { return mix; };
  model.reg.lambda_density = [lo, hi, width](const Vector& x) {
    return (x[0] >= lo && x[0] <= hi) ? 1.0 / width : 0.0;
  };
  model.reg.alpha_slater = Eigen::Map<const Vector>(p.alpha_slater.data(), q);
  model.reg.witness_action = p.witness_action;
  return model;
}

ContinuousCMDP make_inv1() { return make_mix_gauss_1d(MixGauss1dParams{}); }

}  // namespace cmdp
