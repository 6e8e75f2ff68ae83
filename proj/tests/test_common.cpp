#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmdp/common.hpp"

using namespace cmdp;

TEST_CASE("rng streams are deterministic and decorrelated") {
  Rng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK(u == b.uniform01());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(Rng(42, 7).raw() != c.raw());
}

TEST_CASE("normal draws have the right first moments") {
  Rng rng(7);
  double sum = 0, sumsq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("categorical respects weights") {
  Rng rng(3);
  Vector w(3);
  w << 0.2, 0.5, 0.3;
  Vector counts = Vector::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[rng.categorical(w)] += 1.0;
  counts /= n;
  for (int j = 0; j < 3; ++j) CHECK(std::abs(counts[j] - w[j]) < 0.01);
  CHECK_THROWS(Rng(1).categorical(Vector::Zero(2)));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  Vector t, w;
  gauss_legendre(2, t, w);
  CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-14));
  // 2-point rule is exact through degree 3
  double acc = 0;
  for (int i = 0; i < 2; ++i) acc += w[i] * t[i] * t[i];
  CHECK(acc == doctest::Approx(2.0 / 3.0).epsilon(1e-13));

  gauss_legendre(5, t, w);
  double deg9 = 0;
  for (int i = 0; i < 5; ++i) deg9 += w[i] * std::pow(t[i], 8);
  CHECK(deg9 == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("digest is order sensitive and stable") {
  Digest a, b, c;
  a.add(1.0);
  a.add(2.0);
  b.add(1.0);
  b.add(2.0);
  c.add(2.0);
  c.add(1.0);
  CHECK(a.value() == b.value());
  CHECK(a.value() != c.value());
  CHECK(u64_hex(a.value()).size() == 16);
}

TEST_CASE("norm_cdf hits known values") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(norm_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
}
