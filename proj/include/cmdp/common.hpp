#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IVector = Eigen::VectorXi;

inline constexpr const char* kVersion = "0.1.0";

enum class Criterion { discounted, average };

inline const char* to_string(Criterion c) {
  return c == Criterion::discounted ? "discounted" : "average";
}

/// Deterministic random stream. The mt19937_64 engine sequence is pinned by
/// the C++ standard and all variate transforms are implemented here, so the
/// same (seed, stream) pair reproduces identical draws on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(mix(seed, stream)) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller, second variate cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Inverse-CDF draw from an unnormalized weight vector.
  int categorical(const Vector& w) {
    const double total = w.sum();
    if (!(total > 0.0)) throw std::invalid_argument("categorical: weights sum to zero");
    double u = uniform01() * total;
    for (int i = 0; i < w.size(); ++i) {
      u -= w[i];
      if (u <= 0.0) return i;
    }
    return static_cast<int>(w.size()) - 1;
  }

  std::uint64_t raw() { return gen_(); }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 over the pair; decorrelates derived streams.
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// FNV-1a over raw bytes; used for provenance digests of models and tables.
class Digest {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { bytes(&v, sizeof(v)); }
  void add(std::int64_t v) { bytes(&v, sizeof(v)); }
  void add(const std::string& s) { bytes(s.data(), s.size()); }
  void add(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) add(v[i]);
  }
  void add(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) add(m(i, j));
  }
  std::uint64_t value() const { return h_; }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h_));
    return std::string(buf);
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// Nodes and weights of the N-point Gauss-Legendre rule on [-1, 1]
/// (Golub-Welsch on the Jacobi matrix).
inline void gauss_legendre(int n, Vector& nodes, Vector& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  if (n == 1) {
    nodes = Vector::Zero(1);
    weights = Vector::Constant(1, 2.0);
    return;
  }
  Matrix J = Matrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    weights[i] = 2.0 * v * v;
  }
}

inline double span(const Vector& v) { return v.maxCoeff() - v.minCoeff(); }

inline std::string u64_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace cmdp
