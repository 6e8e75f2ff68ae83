#include "cmdp/quantize.hpp"

#include <cmath>

namespace cmdp {

namespace {

// Multi-index helpers for row-major linear cell indices (axis 0 slowest).
int linear_index(const IVector& res, const IVector& idx) {
  int lin = 0;
  for (int ax = 0; ax < res.size(); ++ax) lin = lin * res[ax] + idx[ax];
  return lin;
}

IVector multi_index(const IVector& res, int lin) {
  IVector idx(res.size());
  for (int ax = res.size() - 1; ax >= 0; --ax) {
    idx[ax] = lin % res[ax];
    lin /= res[ax];
  }
  return idx;
}

}  // namespace

Vector Grid::cell_lo(int i) const {
  const IVector idx = multi_index(resolution, i);
  Vector lo(dim());
  for (int ax = 0; ax < dim(); ++ax) {
    const double w = (space.upper[ax] - space.lower[ax]) / resolution[ax];
    lo[ax] = space.lower[ax] + idx[ax] * w;
  }
  return lo;
}

Vector Grid::cell_hi(int i) const {
  const IVector idx = multi_index(resolution, i);
  Vector hi(dim());
  for (int ax = 0; ax < dim(); ++ax) {
    const double w = (space.upper[ax] - space.lower[ax]) / resolution[ax];
    hi[ax] = space.lower[ax] + (idx[ax] + 1) * w;
  }
  return hi;
}

Vector Grid::node(int i, int t) const {
  const Vector lo = cell_lo(i);
  Vector y(dim());
  for (int ax = 0; ax < dim(); ++ax) {
    const double w = (space.upper[ax] - space.lower[ax]) / resolution[ax];
    y[ax] = lo[ax] + node_offsets(t, ax) * w;
  }
  return y;
}

std::uint64_t Grid::digest() const {
  Digest dg;
  dg.add(space.lower);
  dg.add(space.upper);
  for (int ax = 0; ax < resolution.size(); ++ax) dg.add(static_cast<std::int64_t>(resolution[ax]));
  dg.add(static_cast<std::int64_t>(nodes_per_cell()));
  dg.add(node_offsets);
  return dg.value();
}

Grid build_grid(const StateSpace& space, const IVector& resolution, int cell_nodes, StateFn nu) {
  space.validate();
  const int d = space.dim();
  if (resolution.size() != d) throw std::invalid_argument("build_grid: resolution arity mismatch");
  for (int ax = 0; ax < d; ++ax)
    if (resolution[ax] < 1) throw std::invalid_argument("build_grid: resolution must be >= 1");
  if (cell_nodes < 1) throw std::invalid_argument("build_grid: cell_nodes must be >= 1");

  Grid g;
  g.space = space;
  g.resolution = resolution;

  int k_n = 1;
  for (int ax = 0; ax < d; ++ax) k_n *= resolution[ax];
  g.points.resize(k_n, d);
  for (int i = 0; i < k_n; ++i) {
    const IVector idx = multi_index(resolution, i);
    for (int ax = 0; ax < d; ++ax) {
      const double w = (space.upper[ax] - space.lower[ax]) / resolution[ax];
      g.points(i, ax) = space.lower[ax] + (idx[ax] + 0.5) * w;
    }
  }
  double diag2 = 0.0;
  for (int ax = 0; ax < d; ++ax) {
    const double w = (space.upper[ax] - space.lower[ax]) / resolution[ax];
    diag2 += 0.25 * w * w;
  }
  g.covering_radius = std::sqrt(diag2);

  // Cell-local quadrature nodes shared by all cells.
  if (d <= 3) {
    Vector t, w;
    gauss_legendre(cell_nodes, t, w);
    const int nn = static_cast<int>(std::pow(cell_nodes, d));
    g.node_offsets.resize(nn, d);
    g.node_weights.resize(nn);
    for (int m = 0; m < nn; ++m) {
      int rem = m;
      double wt = 1.0;
      for (int ax = d - 1; ax >= 0; --ax) {
        const int j = rem % cell_nodes;
        rem /= cell_nodes;
        g.node_offsets(m, ax) = 0.5 * (t[j] + 1.0);
        wt *= 0.5 * w[j];
      }
      g.node_weights[m] = wt;
    }
  } else {
    // Seeded Monte Carlo nodes; same offsets in every cell keeps builds
    // deterministic and cells exchangeable.
    const int nn = cell_nodes * cell_nodes * cell_nodes;
    Rng rng(0x9c0ffee, k_n);
    g.node_offsets.resize(nn, d);
    g.node_weights = Vector::Constant(nn, 1.0 / nn);
    for (int m = 0; m < nn; ++m)
      for (int ax = 0; ax < d; ++ax) g.node_offsets(m, ax) = rng.uniform01();
  }

  if (nu) {
    g.uniform_weights = false;
    g.per_cell_weights.resize(k_n, g.node_offsets.rows());
    for (int i = 0; i < k_n; ++i) {
      double total = 0.0;
      for (int m = 0; m < g.node_offsets.rows(); ++m) {
        const double v = g.node_weights[m] * nu(g.node(i, m));
        if (v < 0.0) throw std::invalid_argument("build_grid: nu must be nonnegative");
        g.per_cell_weights(i, m) = v;
        total += v;
      }
      if (!(total > 0.0))
        throw std::invalid_argument("build_grid: nu assigns zero mass to a cell");
      g.per_cell_weights.row(i) /= total;
    }
  }
  return g;
}

int quantize_point(const Grid& grid, const Vector& x) {
  if (x.size() != grid.dim()) throw std::invalid_argument("quantize_point: dimension mismatch");
  if (!grid.space.contains(x)) throw std::out_of_range("quantize_point: state outside box");
  IVector idx(grid.dim());
  for (int ax = 0; ax < grid.dim(); ++ax) {
    const double w = (grid.space.upper[ax] - grid.space.lower[ax]) / grid.resolution[ax];
    const double u = (x[ax] - grid.space.lower[ax]) / w;
    int i = static_cast<int>(std::floor(u));
    // A point exactly on a cell boundary is equidistant to the two adjacent
    // centers; the tie goes to the lower index.
    if (u == std::floor(u) && i >= 1) i -= 1;
    idx[ax] = std::clamp(i, 0, grid.resolution[ax] - 1);
  }
  return linear_index(grid.resolution, idx);
}

void FiniteCMDP::validate() const {
  if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("finite model: empty");
  if (static_cast<int>(p.size()) != n_actions) throw std::invalid_argument("finite model: p arity");
  for (const auto& pa : p) {
    if (pa.rows() != n_states || pa.cols() != n_states)
      throw std::invalid_argument("finite model: p shape");
    for (int i = 0; i < n_states; ++i) {
      if (std::abs(pa.row(i).sum() - 1.0) > 1e-10)
        throw std::invalid_argument("finite model: row not stochastic");
      if (pa.row(i).minCoeff() < -1e-12)
        throw std::invalid_argument("finite model: negative transition mass");
    }
  }
  if (std::abs(gamma.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("finite model: gamma not a distribution");
  if (k.size() != q()) throw std::invalid_argument("finite model: constraint arity");
  if (beta <= 0.0 || beta >= 1.0) throw std::invalid_argument("finite model: discount out of range");
}

std::uint64_t FiniteCMDP::digest() const {
  Digest dg;
  dg.add(static_cast<std::int64_t>(n_states));
  dg.add(static_cast<std::int64_t>(n_actions));
  for (const auto& pa : p) dg.add(pa);
  dg.add(c);
  for (const auto& dl : d) dg.add(dl);
  dg.add(gamma);
  dg.add(k);
  dg.add(beta);
  return dg.value();
}

namespace {

// Mass of grid cell j under p(.|x,a): closed form when available, else tensor
// Gauss-Legendre over the target cell.
double target_cell_mass(const ContinuousCMDP& model, const Grid& grid, int j, const Vector& x,
                        const Vector& a) {
  const Vector lo = grid.cell_lo(j), hi = grid.cell_hi(j);
  if (model.transition.cell_mass) return model.transition.cell_mass(lo, hi, x, a);
  double acc = 0.0;
  double vol = 1.0;
  for (int ax = 0; ax < grid.dim(); ++ax) vol *= hi[ax] - lo[ax];
  for (int t = 0; t < grid.nodes_per_cell(); ++t) {
    Vector y(grid.dim());
    for (int ax = 0; ax < grid.dim(); ++ax)
      y[ax] = lo[ax] + grid.node_offsets(t, ax) * (hi[ax] - lo[ax]);
    // node_weights are the nu-normalized Lebesgue weights on the unit cell.
    acc += grid.node_weights[t] * model.transition.density(y, x, a) * vol;
  }
  return acc;
}

}  // namespace

FiniteCMDP build_finite_model(const ContinuousCMDP& model, const Grid& grid, double tol) {
  const int k_n = grid.size();
  const int na = model.actions.count();
  const int q = model.cost.q();

  FiniteCMDP fm;
  fm.n_states = k_n;
  fm.n_actions = na;
  fm.beta = model.cost.beta;
  fm.k = model.cost.k;
  fm.c.resize(k_n, na);
  fm.d.assign(q, Matrix(k_n, na));
  fm.p.assign(na, Matrix(k_n, k_n));

  const bool with_minorization = static_cast<bool>(model.reg.phi) &&
                                 static_cast<bool>(model.reg.lambda_density) &&
                                 model.reg.alpha_min > 0.0;
  if (with_minorization) {
    fm.phi.resize(k_n, na);
    fm.alpha_min = model.reg.alpha_min;
  }

  double worst_defect = 0.0;
  Vector row(k_n);
  for (int ai = 0; ai < na; ++ai) {
    const Vector a = model.actions.action(ai);
    Matrix& pa = fm.p[ai];
    for (int i = 0; i < k_n; ++i) {
      row.setZero();
      double ci = 0.0;
      Vector di = Vector::Zero(q);
      double phii = 0.0;
      for (int t = 0; t < grid.nodes_per_cell(); ++t) {
        const Vector x = grid.node(i, t);
        const double w = grid.weight(i, t);
        for (int j = 0; j < k_n; ++j) row[j] += w * target_cell_mass(model, grid, j, x, a);
        ci += w * model.cost.c(x, a);
        for (int l = 0; l < q; ++l) di[l] += w * model.cost.d[l](x, a);
        if (with_minorization) phii += w * model.reg.phi(x, a);
      }
      const double mass = row.sum();
      const double defect = std::abs(mass - 1.0);
      worst_defect = std::max(worst_defect, defect);
      if (defect > tol)
        throw std::runtime_error("build_finite_model: kernel quadrature too coarse (row defect " +
                                 format_double(defect) + ")");
      pa.row(i) = row.transpose() / mass;
      fm.c(i, ai) = ci;
      for (int l = 0; l < q; ++l) fm.d[l](i, ai) = di[l];
      if (with_minorization) fm.phi(i, ai) = phii;
    }
  }
  fm.quad_defect = worst_defect;

  // Initial distribution: integrate the gamma density over cells, then
  // renormalize the quadrature defect away.
  fm.gamma.resize(k_n);
  for (int i = 0; i < k_n; ++i) {
    const Vector lo = grid.cell_lo(i), hi = grid.cell_hi(i);
    double vol = 1.0;
    for (int ax = 0; ax < grid.dim(); ++ax) vol *= hi[ax] - lo[ax];
    double acc = 0.0;
    for (int t = 0; t < grid.nodes_per_cell(); ++t) {
      Vector y(grid.dim());
      for (int ax = 0; ax < grid.dim(); ++ax)
        y[ax] = lo[ax] + grid.node_offsets(t, ax) * (hi[ax] - lo[ax]);
      acc += grid.node_weights[t] * model.cost.gamma_density(y) * vol;
    }
    fm.gamma[i] = acc;
  }
  if (!(fm.gamma.sum() > 0.0))
    throw std::runtime_error("build_finite_model: initial distribution has zero mass on the grid");
  fm.gamma /= fm.gamma.sum();

  if (with_minorization) {
    fm.lambda.resize(k_n);
    for (int i = 0; i < k_n; ++i) {
      const Vector lo = grid.cell_lo(i), hi = grid.cell_hi(i);
      double vol = 1.0;
      for (int ax = 0; ax < grid.dim(); ++ax) vol *= hi[ax] - lo[ax];
      double acc = 0.0;
      for (int t = 0; t < grid.nodes_per_cell(); ++t) {
        Vector y(grid.dim());
        for (int ax = 0; ax < grid.dim(); ++ax)
          y[ax] = lo[ax] + grid.node_offsets(t, ax) * (hi[ax] - lo[ax]);
        acc += grid.node_weights[t] * model.reg.lambda_density(y) * vol;
      }
      fm.lambda[i] = std::max(acc, 0.0);
    }
    if (fm.lambda.sum() > 0.0) fm.lambda /= fm.lambda.sum();
  }

  fm.validate();
  return fm;
}

double SurrogateEvaluators::q_mass(const Vector& x, int a, int j) const {
  const int i = quantize_point(*grid, x);
  const Vector av = model->actions.action(a);
  double acc = 0.0;
  for (int t = 0; t < grid->nodes_per_cell(); ++t)
    acc += grid->weight(i, t) * target_cell_mass(*model, *grid, j, grid->node(i, t), av);
  return acc;
}

Vector SurrogateEvaluators::q_row(const Vector& x, int a) const {
  Vector row(grid->size());
  const int i = quantize_point(*grid, x);
  const Vector av = model->actions.action(a);
  row.setZero();
  for (int t = 0; t < grid->nodes_per_cell(); ++t) {
    const Vector z = grid->node(i, t);
    const double w = grid->weight(i, t);
    for (int j = 0; j < grid->size(); ++j) row[j] += w * target_cell_mass(*model, *grid, j, z, av);
  }
  return row;
}

double SurrogateEvaluators::b(const Vector& x, int a) const {
  const int i = quantize_point(*grid, x);
  const Vector av = model->actions.action(a);
  double acc = 0.0;
  for (int t = 0; t < grid->nodes_per_cell(); ++t)
    acc += grid->weight(i, t) * model->cost.c(grid->node(i, t), av);
  return acc;
}

double SurrogateEvaluators::r(const Vector& x, int a, int l) const {
  const int i = quantize_point(*grid, x);
  const Vector av = model->actions.action(a);
  double acc = 0.0;
  for (int t = 0; t < grid->nodes_per_cell(); ++t)
    acc += grid->weight(i, t) * model->cost.d[l](grid->node(i, t), av);
  return acc;
}

SurrogateEvaluators surrogate_evaluators(const ContinuousCMDP& model, const Grid& grid) {
  return SurrogateEvaluators{&model, &grid};
}

void estimate_sup_norms(const ContinuousCMDP& model, const Grid& grid, double& sup_c,
                        Vector& sup_d) {
  sup_c = 0.0;
  sup_d = Vector::Zero(model.cost.q());
  for (int i = 0; i < grid.size(); ++i)
    for (int t = 0; t < grid.nodes_per_cell(); ++t) {
      const Vector x = grid.node(i, t);
      for (int ai = 0; ai < model.actions.count(); ++ai) {
        const Vector a = model.actions.action(ai);
        sup_c = std::max(sup_c, model.cost.c(x, a));
        for (int l = 0; l < model.cost.q(); ++l)
          sup_d[l] = std::max(sup_d[l], model.cost.d[l](x, a));
      }
    }
}

}  // namespace cmdp
