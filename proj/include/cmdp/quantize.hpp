#pragma once

#include "cmdp/model.hpp"

namespace cmdp {

/// Uniform product grid of cell centers over the state box. Cells are the
/// nearest-neighbor regions; ties quantize to the lowest linear index. The
/// per-cell weighting measure nu_{n,i} is realized by tensor Gauss-Legendre
/// nodes (seeded Monte Carlo nodes above dimension 3).
struct Grid {
  StateSpace space;
  IVector resolution;       // cells per axis (row-major linear indexing, axis 0 slowest)
  Matrix points;            // k_n x dim cell centers
  double covering_radius = 0.0;
  Matrix node_offsets;      // nodes_per_cell x dim, cell-local coordinates in [0,1]
  Vector node_weights;      // shared nu weights when uniform_weights
  bool uniform_weights = true;
  Matrix per_cell_weights;  // k_n x nodes_per_cell when a custom nu is supplied

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  int nodes_per_cell() const { return static_cast<int>(node_offsets.rows()); }

  Vector cell_lo(int i) const;
  Vector cell_hi(int i) const;
  Vector node(int i, int t) const;
  double weight(int i, int t) const {
    return uniform_weights ? node_weights[t] : per_cell_weights(i, t);
  }

  /// alpha_cov such that covering_radius == alpha_cov * (1/k_n)^(1/dim).
  double alpha_cov() const { return covering_radius * std::pow(size(), 1.0 / dim()); }

  std::uint64_t digest() const;
};

Grid build_grid(const StateSpace& space, const IVector& resolution, int cell_nodes,
                StateFn nu = nullptr);

/// Nearest representative index; ties break toward the lowest index.
int quantize_point(const Grid& grid, const Vector& x);

/// Finite constrained model induced by a grid.
struct FiniteCMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Matrix> p;  // per action, n_states x n_states rows p(j|i,a)
  Matrix c;               // n_states x n_actions
  std::vector<Matrix> d;  // q cost tables
  Vector gamma;
  Vector k;
  double beta = 0.0;
  Matrix phi;     // quantized minorization weight (empty when undeclared)
  Vector lambda;  // quantized minorization measure
  double alpha_min = 0.0;    // declared minorization coefficient
  double quad_defect = 0.0;  // worst pre-normalization row defect

  int q() const { return static_cast<int>(d.size()); }
  void validate() const;  // row stochasticity, mass, dimensions
  std::uint64_t digest() const;
};

/// Double-quadrature pushforward build of (p_n, c_n, d_{l,n}, gamma_n) plus
/// quantized minorization data when present. Rows are renormalized; a
/// pre-normalization defect above tol is an error ("kernel quadrature too
/// coarse").
FiniteCMDP build_finite_model(const ContinuousCMDP& model, const Grid& grid, double tol = 1e-6);

/// Cell-averaged surrogate model evaluators (cell-constant in x).
struct SurrogateEvaluators {
  const ContinuousCMDP* model = nullptr;
  const Grid* grid = nullptr;

  /// Mass of cell j under q_n(.|x,a).
  double q_mass(const Vector& x, int a, int j) const;
  /// Full pushforward row of q_n(.|x,a) onto grid cells.
  Vector q_row(const Vector& x, int a) const;
  double b(const Vector& x, int a) const;
  double r(const Vector& x, int a, int l) const;
};

SurrogateEvaluators surrogate_evaluators(const ContinuousCMDP& model, const Grid& grid);

/// Sup-norm estimates of c and d_l over all cell quadrature nodes x actions.
void estimate_sup_norms(const ContinuousCMDP& model, const Grid& grid, double& sup_c,
                        Vector& sup_d);

}  // namespace cmdp
