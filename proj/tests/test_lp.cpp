#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmdp/lp.hpp"

#include "fixtures.hpp"

#include <bitset>

using namespace cmdp;
using namespace cmdpt;

namespace {

LinearProgram lp_of(const Matrix& A, const Vector& b, const Vector& c) {
  return LinearProgram{c, A, b, {}};
}

// Exhaustive basic-feasible-solution enumeration, the textbook oracle.
double vertex_enumeration_min(const LinearProgram& lp) {
  const int m = lp.rows(), n = lp.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(m);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == m) {
      Matrix B(m, m);
      for (int i = 0; i < m; ++i) B.col(i) = lp.eq_matrix.col(idx[i]);
      Eigen::FullPivLU<Matrix> lu(B);
      if (!lu.isInvertible()) return;
      const Vector xb = lu.solve(lp.eq_rhs);
      if (xb.minCoeff() < -1e-9) return;
      double obj = 0;
      for (int i = 0; i < m; ++i) obj += lp.objective[idx[i]] * xb[i];
      best = std::min(best, obj);
      return;
    }
    for (int j = start; j < n; ++j) {
      idx[depth] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("one-variable equality") {
  Matrix A(1, 1);
  A << 1.0;
  const LPSolution sol = solve_lp(lp_of(A, Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)));
  REQUIRE(sol.status == LPStatus::optimal);
  CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.dual[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sign conflict is infeasible with a Farkas row") {
  Matrix A(1, 1);
  A << 1.0;
  const LPSolution sol = solve_lp(lp_of(A, Vector::Constant(1, -1.0), Vector::Zero(1)));
  CHECK(sol.status == LPStatus::infeasible);
  CHECK(sol.farkas_row == 0);
}

TEST_CASE("unbounded direction is reported as a ray") {
  Matrix A(1, 2);
  A << 1.0, -1.0;
  Vector c(2);
  c << -1.0, 0.0;
  const LPSolution sol = solve_lp(lp_of(A, Vector::Zero(1), c));
  REQUIRE(sol.status == LPStatus::unbounded);
  REQUIRE(sol.ray.size() == 2);
  // the ray keeps feasibility and improves the objective
  CHECK((A * sol.ray).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(c.dot(sol.ray) < 0.0);
}

TEST_CASE("transportation LP matches exhaustive vertex enumeration") {
  Matrix A(2, 3);
  A << 1, 1, 0, 0, 1, 1;
  Vector b(2);
  b << 1, 1;
  Vector c(3);
  c << 3, 1, 2;
  const LinearProgram lp = lp_of(A, b, c);
  const LPSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LPStatus::optimal);
  CHECK(sol.objective == doctest::Approx(vertex_enumeration_min(lp)).epsilon(1e-12));
}

TEST_CASE("beale degeneracy does not cycle under bland") {
  // Beale's classic cycling instance in standard form (three slacks added).
  Matrix A(3, 7);
  A << 0.25, -60, -1.0 / 25, 9, 1, 0, 0,
       0.5,  -90, -1.0 / 50, 3, 0, 1, 0,
       0,      0,  1,        0, 0, 0, 1;
  Vector b(3);
  b << 0, 0, 1;
  Vector c(7);
  c << -0.75, 150, -0.02, 6, 0, 0, 0;
  const LPSolution sol = solve_lp(lp_of(A, b, c));
  REQUIRE(sol.status == LPStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-10));
}

TEST_CASE("random feasible-by-construction LPs are solved with certificates") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + static_cast<int>(rng.raw() % 6);
    const int n = m + 1 + static_cast<int>(rng.raw() % 6);
    Matrix A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
    Vector z0(n);
    for (int j = 0; j < n; ++j) z0[j] = rng.uniform01();
    const Vector b = A * z0;
    Vector c(n);
    for (int j = 0; j < n; ++j) c[j] = rng.uniform(-1.0, 1.0);
    const LinearProgram lp = lp_of(A, b, c);
    const LPSolution sol = solve_lp(lp);
    if (sol.status == LPStatus::unbounded) {
      CHECK(c.dot(sol.ray) < 0);
      CHECK((A * sol.ray).cwiseAbs().maxCoeff() <= 1e-8);
      continue;
    }
    REQUIRE(sol.status == LPStatus::optimal);
    CHECK(sol.objective <= c.dot(z0) + 1e-9);
    CHECK(sol.primal_residual <= 1e-9);
    CHECK(sol.dual_residual <= 1e-8);
    CHECK(sol.comp_slack <= 1e-7);
    // strong duality certificate
    CHECK(std::abs(b.dot(sol.dual) - sol.objective) <= 1e-9 * (1 + std::abs(sol.objective)));
  }
}

TEST_CASE("redundant rows survive phase one") {
  // Second row duplicates the first; solver must not declare infeasibility.
  Matrix A(2, 2);
  A << 1, 1, 1, 1;
  Vector b(2);
  b << 1, 1;
  Vector c(2);
  c << 2, 1;
  const LPSolution sol = solve_lp(lp_of(A, b, c));
  REQUIRE(sol.status == LPStatus::optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dump emits readable standard form") {
  Matrix A(1, 2);
  A << 1, -2;
  Vector b = Vector::Constant(1, 3.0);
  Vector c(2);
  c << 1, 0;
  const std::string text = dump_lp(lp_of(A, b, c));
  CHECK(text.find("minimize") != std::string::npos);
  CHECK(text.find("= 3") != std::string::npos);
}
