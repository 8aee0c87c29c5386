#include "csgame/pde/operator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "csgame/error.hpp"

namespace csgame {

DiscreteGenerator::DiscreteGenerator(const Grid& grid, const ProblemSpec& spec, double peclet_limit)
    : grid_(grid), peclet_(peclet_limit) {
  const int d = grid.dim();
  if (spec.dim != d) throw ConfigError("grid and problem dimensions differ");
  const int s = stencil_size();
  const std::ptrdiff_t nx = grid.nx();
  if (d == 1) {
    offsets_ = {-1, 0, 1};
  } else {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) offsets_.push_back(di + dj * nx);
    }
  }

  const std::size_t nodes = grid.nodes();
  a_.assign(nodes * d * d, 0.0);
  base_.assign(nodes * s, 0.0);
  std::vector<double> x(d), b(d);
  const double h2 = grid.hx() * grid.hx();
  for (std::size_t k = 0; k < nodes; ++k) {
    grid.node_x(k, x);
    spec.diffusion_at(x, std::span<double>(&a_[k * d * d], d * d));
    for (int i = 0; i < d; ++i) max_diffusion_ = std::max(max_diffusion_, a_[k * d * d + i * d + i]);
  }
  for (std::size_t k : grid.interior()) {
    grid.node_x(k, x);
    spec.drift_at(x, b);
    std::span<double> w(&base_[k * s], s);
    const double* a = &a_[k * d * d];
    const int c = centre();
    for (int i = 0; i < d; ++i) {
      const int step = i == 0 ? 1 : 3;
      const double v = 0.5 * a[i * d + i] / h2;
      w[c - step] += v;
      w[c] -= 2.0 * v;
      w[c + step] += v;
      first_order(k, i, b[i], w);
    }
    if (d == 2) {
      const double v = a[1] / (4.0 * h2);
      w[8] += v;
      w[0] += v;
      w[2] -= v;
      w[6] -= v;
    }
  }
}

double DiscreteGenerator::cfl() const noexcept {
  return grid_.ht() * max_diffusion_ / (grid_.hx() * grid_.hx());
}

void DiscreteGenerator::first_order(std::size_t node, int axis, double beta,
                                    std::span<double> w) const noexcept {
  if (beta == 0.0) return;
  const int d = grid_.dim();
  const double a = a_[node * d * d + axis * d + axis];
  const double h = grid_.hx();
  const int c = centre();
  const int step = axis == 0 ? 1 : 3;
  if (a > 0.0 && std::abs(beta) * h / a <= peclet_) {
    w[c + step] += beta / (2.0 * h);
    w[c - step] -= beta / (2.0 * h);
  } else if (beta > 0.0) {
    w[c + step] += beta / h;
    w[c] -= beta / h;
  } else {
    w[c] += beta / h;
    w[c - step] -= beta / h;
  }
}

void DiscreteGenerator::add_drift(std::size_t node, std::span<const double> y,
                                  std::span<double> w) const noexcept {
  for (int i = 0; i < grid_.dim(); ++i) first_order(node, i, y[i], w);
}

void DiscreteGenerator::add_centred_drift(std::span<const double> y, std::span<double> w) const noexcept {
  const double inv = 0.5 / grid_.hx();
  const int c = centre();
  for (int i = 0; i < grid_.dim(); ++i) {
    const int step = i == 0 ? 1 : 3;
    w[c + step] += y[i] * inv;
    w[c - step] -= y[i] * inv;
  }
}

double DiscreteGenerator::apply(std::span<const double> u, std::size_t node) const noexcept {
  const auto w = weights(node);
  double acc = 0.0;
  for (int k = 0; k < stencil_size(); ++k) acc += w[k] * u[node + offsets_[k]];
  return acc;
}

struct LevelSystem::Sparse {
  Eigen::SparseMatrix<double> A;
  std::vector<std::ptrdiff_t> slot;  // per (row, stencil entry): index into valuePtr, -1 if boundary
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> iterative;
  Eigen::VectorXd b, x, guess;
};

LevelSystem::LevelSystem(const DiscreteGenerator& gen) : gen_(gen), stencil_(gen.stencil_size()) {
  const Grid& grid = gen.grid();
  const std::size_t n = grid.interior().size();
  coef_.assign(n * stencil_, 0.0);
  rhs_.assign(n, 0.0);
  if (grid.dim() == 1) {
    work_c_.resize(n);
    work_d_.resize(n);
    return;
  }

  sparse_ = std::make_unique<Sparse>();
  std::vector<std::ptrdiff_t> row_of(grid.nodes(), -1);
  for (std::size_t r = 0; r < n; ++r) row_of[grid.interior()[r]] = static_cast<std::ptrdiff_t>(r);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * stencil_);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t node = grid.interior()[r];
    for (int k = 0; k < stencil_; ++k) {
      const std::ptrdiff_t col = row_of[node + gen.offset(k)];
      if (col >= 0) trip.emplace_back(static_cast<int>(r), static_cast<int>(col), 1.0);
    }
  }
  auto& A = sparse_->A;
  A.resize(static_cast<int>(n), static_cast<int>(n));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  sparse_->slot.assign(n * stencil_, -1);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t node = grid.interior()[r];
    for (int k = 0; k < stencil_; ++k) {
      const std::ptrdiff_t col = row_of[node + gen.offset(k)];
      if (col >= 0) {
        sparse_->slot[r * stencil_ + k] = &A.coeffRef(static_cast<int>(r), static_cast<int>(col)) - A.valuePtr();
      }
    }
  }
  sparse_->lu.analyzePattern(A);
  sparse_->iterative.setTolerance(1e-13);
  sparse_->iterative.setMaxIterations(200);
  sparse_->b.resize(static_cast<int>(n));
  sparse_->guess.resize(static_cast<int>(n));
}

LevelSystem::~LevelSystem() = default;

void LevelSystem::solve(std::span<double> u) {
  const Grid& grid = gen_.grid();
  const auto interior = grid.interior();
  const std::size_t n = interior.size();

  // boundary couplings go to the right-hand side
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t node = interior[r];
    for (int k = 0; k < stencil_; ++k) {
      const std::size_t nb = node + gen_.offset(k);
      if (k != gen_.centre() && grid.is_boundary(nb)) rhs_[r] -= coef_[r * stencil_ + k] * u[nb];
    }
  }

  if (grid.dim() == 1) {
    // Thomas algorithm; interior nodes are 1..nx-2 in order
    double denom = coef_[1];
    if (denom == 0.0) throw SolverError(SolverError::Kind::kLinearSolve, "zero pivot in tridiagonal solve");
    work_c_[0] = coef_[2] / denom;
    work_d_[0] = rhs_[0] / denom;
    for (std::size_t r = 1; r < n; ++r) {
      const double lower = coef_[r * 3];
      denom = coef_[r * 3 + 1] - lower * work_c_[r - 1];
      if (denom == 0.0 || !std::isfinite(denom)) {
        throw SolverError(SolverError::Kind::kLinearSolve, "zero pivot in tridiagonal solve");
      }
      work_c_[r] = coef_[r * 3 + 2] / denom;
      work_d_[r] = (rhs_[r] - lower * work_d_[r - 1]) / denom;
    }
    u[interior[n - 1]] = work_d_[n - 1];
    for (std::size_t r = n - 1; r-- > 0;) {
      work_d_[r] -= work_c_[r] * work_d_[r + 1];
      u[interior[r]] = work_d_[r];
    }
    return;
  }

  auto& sp = *sparse_;
  double* vals = sp.A.valuePtr();
  for (std::size_t i = 0; i < n * stencil_; ++i) {
    if (sp.slot[i] >= 0) vals[sp.slot[i]] = coef_[i];
  }
  for (std::size_t r = 0; r < n; ++r) {
    sp.b[static_cast<int>(r)] = rhs_[r];
    sp.guess[static_cast<int>(r)] = u[interior[r]];
  }
  // Backward-Euler level matrices are close to the identity; preconditioned
  // BiCGSTAB from the current values is much cheaper than refactorising.
  // SparseLU remains the fallback.
  sp.iterative.compute(sp.A);
  if (sp.iterative.info() == Eigen::Success) {
    sp.x = sp.iterative.solveWithGuess(sp.b, sp.guess);
  }
  if (sp.iterative.info() != Eigen::Success || !sp.x.allFinite()) {
    sp.lu.factorize(sp.A);
    if (sp.lu.info() != Eigen::Success) {
      throw SolverError(SolverError::Kind::kLinearSolve, "sparse LU factorisation failed");
    }
    sp.x = sp.lu.solve(sp.b);
    if (sp.lu.info() != Eigen::Success) {
      throw SolverError(SolverError::Kind::kLinearSolve, "sparse LU solve failed");
    }
  }
  for (std::size_t r = 0; r < n; ++r) u[interior[r]] = sp.x[static_cast<int>(r)];
}

}  // namespace csgame
