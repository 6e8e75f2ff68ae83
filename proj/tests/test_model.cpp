#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

using namespace cmdp;
using namespace cmdpt;

TEST_CASE("inv1 passes the full validation audit") {
  const ContinuousCMDP model = make_inv1();
  const ValidationReport rep = validate_model(model, 1e-3, 11);
  for (const auto& c : rep.checks) {
    INFO(c.name, " ", c.detail, " worst=", c.worst);
    CHECK(c.status != CheckStatus::hard_error);
    CHECK(c.status != CheckStatus::warn);
    CHECK(c.status != CheckStatus::fail);
  }
}

TEST_CASE("beta at the boundary is a hard error") {
  MixGauss1dParams p;
  p.beta = 1.0;
  const ContinuousCMDP model = make_mix_gauss_1d(p);
  const ValidationReport rep = validate_model(model, 1e-3, 1);
  REQUIRE(rep.find("discount") != nullptr);
  CHECK(rep.find("discount")->status == CheckStatus::hard_error);
  CHECK(rep.hard_errors());
}

TEST_CASE("nonpositive k is a hard error") {
  MixGauss1dParams p;
  p.k = {0.0};
  const ValidationReport rep = validate_model(make_mix_gauss_1d(p), 1e-3, 1);
  CHECK(rep.find("constraint_vector")->status == CheckStatus::hard_error);
}

TEST_CASE("declared minorization must cover 1 - alpha_min") {
  ContinuousCMDP model = make_inv1();
  model.reg.alpha_min = 0.05;  // claims phi >= 0.95, actual phi is 0.3
  const ValidationReport rep = validate_model(model, 1e-3, 5);
  CHECK(rep.find("minorization")->status == CheckStatus::warn);
}

TEST_CASE("additive noise: truncated gaussian normalizes on the box") {
  const ContinuousCMDP model = make_unit_gauss_model(0.2);
  Rng rng(3);
  Vector t, w;
  gauss_legendre(64, t, w);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x = Vector::Constant(1, rng.uniform01());
    const Vector a = model.actions.action(trial % 2);
    double mass = 0.0;
    for (int i = 0; i < t.size(); ++i) {
      Vector y = Vector::Constant(1, 0.5 * (t[i] + 1.0));
      mass += 0.5 * w[i] * model.transition.density(y, x, a);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    // strictly positive density everywhere on the box
    for (double yv : {0.0, 0.31, 0.77, 1.0})
      CHECK(model.transition.density(Vector::Constant(1, yv), x, a) > 0.0);
  }
}

TEST_CASE("additive noise: sampler agrees with the density mass") {
  const ContinuousCMDP model = make_unit_gauss_model(0.2);
  Rng rng(17);
  const Vector x = Vector::Constant(1, 0.4);
  const Vector a = model.actions.action(1);
  long below = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i) below += model.transition.sampler(x, a, rng)[0] < 0.5 ? 1 : 0;
  const double mass = model.transition.cell_mass(Vector::Constant(1, 0.0),
                                                 Vector::Constant(1, 0.5), x, a);
  const double se = std::sqrt(mass * (1 - mass) / n);
  CHECK(std::abs(static_cast<double>(below) / n - mass) < 4 * se + 1e-6);
}

TEST_CASE("zero-variance noise is rejected") {
  StateSpace space{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
  ActionGrid actions;
  actions.actions = Matrix::Zero(1, 1);
  NoiseSpec noise;
  noise.sigma = Vector::Constant(1, 0.0);
  CHECK_THROWS_AS(make_additive_noise(
                      space, actions,
                      [](const Vector& x, const Vector&) { return x; }, noise, CostSpec{}),
                  std::invalid_argument);
}

TEST_CASE("constant drift gives a kernel with zero modulus estimates") {
  MixGauss1dParams p;
  p.drift_x = 0.0;
  p.drift_a = 0.0;
  p.drift0 = 0.5;  // H(x,a) = 0.5 everywhere
  ContinuousCMDP model = make_mix_gauss_1d(p);
  const ValidationReport rep = validate_model(model, 1e-3, 23);
  CHECK(rep.find("kernel_tv_lipschitz")->worst <= 1e-8);
  CHECK(rep.find("kernel_w1_lipschitz")->worst <= 1e-8);
}

TEST_CASE("malformed boxes are rejected") {
  StateSpace bad{Vector::Constant(1, 1.0), Vector::Constant(1, 0.0)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  StateSpace inf{Vector::Constant(1, 0.0),
                 Vector::Constant(1, std::numeric_limits<double>::infinity())};
  CHECK_THROWS_AS(inf.validate(), std::invalid_argument);
  ActionGrid dup;
  dup.actions = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("model json round-trip is bit-exact") {
  const ContinuousCMDP model = make_inv1();
  const std::string j1 = save_model_json(model);
  const ContinuousCMDP again = load_model_json(j1);
  CHECK(again.params_json == model.params_json);
  CHECK(again.digest() == model.digest());
  CHECK(save_model_json(again) == j1);
  CHECK(again.cost.beta == model.cost.beta);
  CHECK(again.cost.k == model.cost.k);
  CHECK(again.reg.G_p == model.reg.G_p);
}

TEST_CASE("unknown family is rejected") {
  CHECK_THROWS_AS(load_model_json(R"({"family":"nope","params":{}})"), std::invalid_argument);
}
