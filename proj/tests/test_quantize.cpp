#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

using namespace cmdp;
using namespace cmdpt;

namespace {
StateSpace unit_box(int dim) {
  return StateSpace{Vector::Zero(dim), Vector::Ones(dim)};
}
}  // namespace

TEST_CASE("1-D product grid geometry") {
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 4), 3);
  REQUIRE(g.size() == 4);
  CHECK(g.points(0, 0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g.points(1, 0) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(g.points(3, 0) == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(g.covering_radius == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(g.alpha_cov() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("2-D grid covering radius is half the cell diagonal") {
  const Grid g = build_grid(unit_box(2), IVector::Constant(2, 2), 2);
  REQUIRE(g.size() == 4);
  CHECK(g.covering_radius == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("degenerate resolutions are rejected") {
  CHECK_THROWS_AS(build_grid(unit_box(1), IVector::Constant(1, 0), 2), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(unit_box(1), IVector::Constant(1, 4), 0), std::invalid_argument);
}

TEST_CASE("nearest-neighbor quantization with lowest-index ties") {
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 4), 2);
  CHECK(quantize_point(g, Vector::Constant(1, 0.2)) == 0);
  CHECK(quantize_point(g, Vector::Constant(1, 0.25)) == 0);  // tie toward lower index
  CHECK(quantize_point(g, Vector::Constant(1, 0.5)) == 1);
  for (int i = 0; i < 4; ++i)
    CHECK(quantize_point(g, g.points.row(i).transpose()) == i);  // idempotent on grid points
  CHECK(quantize_point(g, Vector::Constant(1, 1.0)) == 3);
  CHECK_THROWS_AS(quantize_point(g, Vector::Constant(1, 1.2)), std::out_of_range);
}

TEST_CASE("every quadrature node quantizes to its own cell") {
  IVector res(2);
  res << 3, 2;
  const Grid g = build_grid(unit_box(2), res, 3);
  for (int i = 0; i < g.size(); ++i) {
    double wsum = 0.0;
    for (int t = 0; t < g.nodes_per_cell(); ++t) {
      CHECK(quantize_point(g, g.node(i, t)) == i);
      wsum += g.weight(i, t);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("custom nu reweights cells and rejects zero-mass cells") {
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 4), 4,
                            [](const Vector& x) { return x[0]; });
  for (int i = 0; i < 4; ++i) {
    double wsum = 0.0, mean = 0.0;
    for (int t = 0; t < g.nodes_per_cell(); ++t) {
      wsum += g.weight(i, t);
      mean += g.weight(i, t) * g.node(i, t)[0];
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean > g.points(i, 0));  // density increasing in x shifts the mean right
  }
  CHECK_THROWS_AS(build_grid(unit_box(1), IVector::Constant(1, 4), 4,
                             [](const Vector& x) { return x[0] < 0.5 ? 1.0 : 0.0; }),
                  std::invalid_argument);
}

TEST_CASE("x-constant kernel discretizes exactly") {
  // Transition density uniform on the box regardless of (x,a): every p_n row
  // is exactly the cell-width vector and the quadrature defect vanishes.
  ContinuousCMDP model = make_unit_gauss_model();
  model.transition.density = [](const Vector&, const Vector&, const Vector&) { return 1.0; };
  model.transition.cell_mass = nullptr;
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 5), 4);
  const FiniteCMDP fm = build_finite_model(model, g, 1e-9);
  CHECK(fm.quad_defect <= 1e-12);
  for (int a = 0; a < fm.n_actions; ++a)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(fm.p[a](i, j) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("near-deterministic drift concentrates rows on the drift cell") {
  MixGauss1dParams p;
  p.sigma = 0.005;
  p.mix = 0.0;
  p.drift0 = -0.29;  // H(x,a) ~ x + a - 0.29 lands mid-cell for the cases below
  const ContinuousCMDP model = make_mix_gauss_1d(p);
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 4), 4);
  const FiniteCMDP fm = build_finite_model(model, g, 1e-6);
  // From cell 1 (center .375) with action 0: H ~ .085 -> cell 0.
  CHECK(fm.p[0](1, 0) > 0.999);
  // With action 0.5: H ~ .585 -> cell 2.
  CHECK(fm.p[2](1, 2) > 0.999);
}

TEST_CASE("pushforward matches a Monte Carlo oracle within 3 standard errors") {
  MixGauss1dParams p;
  p.sigma = 0.2;
  const ContinuousCMDP model = make_mix_gauss_1d(p);
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 4), 4);
  const FiniteCMDP fm = build_finite_model(model, g, 1e-6);
  Rng rng(99);
  const long N = 1000000;
  for (int i = 0; i < fm.n_states; ++i)
    for (int a = 0; a < fm.n_actions; ++a) {
      Vector counts = Vector::Zero(fm.n_states);
      const Vector lo = g.cell_lo(i), hi = g.cell_hi(i);
      const Vector av = model.actions.action(a);
      for (long s = 0; s < N; ++s) {
        Vector x = Vector::Constant(1, rng.uniform(lo[0], hi[0]));  // nu uniform on the cell
        counts[quantize_point(g, model.transition.sampler(x, av, rng))] += 1.0;
      }
      counts /= static_cast<double>(N);
      for (int j = 0; j < fm.n_states; ++j) {
        const double se = std::sqrt(std::max(fm.p[a](i, j) * (1 - fm.p[a](i, j)), 1e-12) / N);
        CHECK(std::abs(counts[j] - fm.p[a](i, j)) < 3.0 * se + 2e-4);
      }
    }
}

TEST_CASE("cell averages sandwich and Lipschitz displacement bound") {
  const ContinuousCMDP model = make_inv1();
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 8), 4);
  const FiniteCMDP fm = build_finite_model(model, g, 1e-6);
  for (int i = 0; i < fm.n_states; ++i)
    for (int a = 0; a < fm.n_actions; ++a) {
      double mn = 1e300, mx = -1e300;
      for (int t = 0; t < g.nodes_per_cell(); ++t) {
        const double v = model.cost.c(g.node(i, t), model.actions.action(a));
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      CHECK(fm.c(i, a) >= mn - 1e-12);
      CHECK(fm.c(i, a) <= mx + 1e-12);
      const double at_center = model.cost.c(g.points.row(i).transpose(), model.actions.action(a));
      CHECK(std::abs(fm.c(i, a) - at_center) <= 2.0 * model.reg.K_c * g.covering_radius + 1e-12);
    }
}

TEST_CASE("doubling the resolution halves the covering radius") {
  const Grid a = build_grid(unit_box(2), IVector::Constant(2, 4), 2);
  const Grid b = build_grid(unit_box(2), IVector::Constant(2, 8), 2);
  CHECK(b.covering_radius == doctest::Approx(0.5 * a.covering_radius).epsilon(1e-12));
}

TEST_CASE("surrogate evaluators are cell-constant and consistent with the tables") {
  const ContinuousCMDP model = make_inv1();
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 6), 4);
  const FiniteCMDP fm = build_finite_model(model, g, 1e-6);
  const SurrogateEvaluators sur = surrogate_evaluators(model, g);

  const Vector x1 = Vector::Constant(1, 0.30), x2 = Vector::Constant(1, 0.33);
  REQUIRE(quantize_point(g, x1) == quantize_point(g, x2));
  for (int a = 0; a < fm.n_actions; ++a) {
    CHECK(sur.b(x1, a) == doctest::Approx(sur.b(x2, a)).epsilon(1e-15));
    CHECK((sur.q_row(x1, a) - sur.q_row(x2, a)).cwiseAbs().maxCoeff() <= 1e-15);
    // b at a grid point equals the c_n table
    const Vector xp = g.points.row(2).transpose();
    CHECK(sur.b(xp, a) == doctest::Approx(fm.c(2, a)).epsilon(1e-12));
    CHECK(sur.r(xp, a, 0) == doctest::Approx(fm.d[0](2, a)).epsilon(1e-12));
    // q_n is a probability measure and its pushforward is the p_n row
    const Vector row = sur.q_row(x1, a);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-10));
    const int i = quantize_point(g, x1);
    CHECK((row.transpose() - fm.p[a].row(i)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("sup-norm estimates stay below declared analytic bounds") {
  const ContinuousCMDP model = make_inv1();
  const Grid g = build_grid(unit_box(1), IVector::Constant(1, 16), 4);
  double sup_c;
  Vector sup_d;
  estimate_sup_norms(model, g, sup_c, sup_d);
  CHECK(sup_c <= model.cost.sup_c + 1e-12);
  CHECK(sup_c > 0.9 * model.cost.sup_c);
  CHECK(sup_d[0] <= model.cost.sup_d[0] + 1e-12);
}

TEST_CASE("finite model validation catches broken tables") {
  FiniteCMDP fm = make_toy2();
  fm.p[0](0, 0) += 0.1;
  CHECK_THROWS(fm.validate());
}
