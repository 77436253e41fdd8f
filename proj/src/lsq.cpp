#include "sdtm/lsq.hpp"

#include <cmath>
#include <cstring>
#include <iostream>

namespace sdtm {

Matrix with_bias_column(const Matrix& values) {
  Matrix out(values.rows(), values.cols() + 1);
  out.leftCols(values.cols()) = values;
  out.col(values.cols()).setOnes();
  return out;
}

Matrix with_zero_column(const Matrix& values) {
  Matrix out(values.rows(), values.cols() + 1);
  out.leftCols(values.cols()) = values;
  out.col(values.cols()).setZero();
  return out;
}

long boundary_block_rows(long n_points, BoundaryRowKind kind) {
  switch (kind) {
    case BoundaryRowKind::None: return 0;
    case BoundaryRowKind::Value: return n_points;
    case BoundaryRowKind::PeriodicPair: return n_points;  // n/2 pairs, two rows each
  }
  return 0;
}

Matrix boundary_block(const BasisEvaluation& boundary, BoundaryRowKind kind, int dim) {
  const long n = boundary.points();
  const int m = boundary.basis_count();
  switch (kind) {
    case BoundaryRowKind::None:
      return Matrix(0, m + 1);
    case BoundaryRowKind::Value:
      return with_bias_column(boundary.values);
    case BoundaryRowKind::PeriodicPair: {
      if (boundary.order < 1) throw std::invalid_argument("boundary_block: periodic rows need first derivatives");
      if (n % (2 * dim) != 0) throw std::invalid_argument("boundary_block: boundary layout does not match dim");
      const long per_face = n / (2 * dim);
      Matrix rows = Matrix::Zero(n, m + 1);
      long out = 0;
      for (int face = 0; face < dim; ++face) {
        const long lo = 2 * face * per_face, hi = lo + per_face;
        for (long j = 0; j < per_face; ++j) {
          rows.row(out++).head(m) = boundary.values.row(lo + j) - boundary.values.row(hi + j);
          rows.row(out++).head(m) = boundary.grad[face].row(lo + j) - boundary.grad[face].row(hi + j);
        }
      }
      return rows;
    }
  }
  throw std::logic_error("boundary_block: unhandled kind");
}

LsqSystem assemble_design(const Matrix& interior_block, const Matrix& boundary_block, double lambda_bc,
                          double lambda) {
  if (lambda_bc < 0 || lambda < 0) throw std::invalid_argument("assemble_design: weights must be >= 0");
  if (interior_block.rows() == 0) throw std::invalid_argument("assemble_design: no interior rows");
  if (boundary_block.rows() > 0 && boundary_block.cols() != interior_block.cols())
    throw std::invalid_argument("assemble_design: boundary block column mismatch");

  LsqSystem sys;
  const long cols = interior_block.cols();
  sys.interior_rows = interior_block.rows();
  sys.boundary_rows = lambda_bc > 0 ? boundary_block.rows() : 0;
  sys.ridge_rows = lambda > 0 ? cols : 0;
  sys.interior_scale = std::sqrt(1.0 / static_cast<double>(sys.interior_rows));
  sys.boundary_scale = sys.boundary_rows > 0 ? std::sqrt(lambda_bc / static_cast<double>(sys.boundary_rows)) : 0.0;
  sys.ridge_scale = std::sqrt(lambda);

  sys.design.resize(sys.interior_rows + sys.boundary_rows + sys.ridge_rows, cols);
  sys.design.topRows(sys.interior_rows) = sys.interior_scale * interior_block;
  if (sys.boundary_rows > 0)
    sys.design.middleRows(sys.interior_rows, sys.boundary_rows) = sys.boundary_scale * boundary_block;
  if (sys.ridge_rows > 0)
    sys.design.bottomRows(sys.ridge_rows) = sys.ridge_scale * Matrix::Identity(cols, cols);
  return sys;
}

LsqSystem assemble_design(const BasisEvaluation& interior, const BasisEvaluation* boundary, BoundaryRowKind kind,
                          double lambda_bc, double lambda) {
  const int dim = interior.order >= 1 ? static_cast<int>(interior.grad.size()) : 1;
  Matrix bdy = boundary && kind != BoundaryRowKind::None ? boundary_block(*boundary, kind, dim)
                                                         : Matrix(0, interior.basis_count() + 1);
  return assemble_design(with_bias_column(interior.values), bdy, lambda_bc, lambda);
}

Matrix stack_rhs(const LsqSystem& system, const Matrix& interior_target, const Matrix& boundary_target) {
  if (interior_target.rows() != system.interior_rows)
    throw std::invalid_argument("stack_rhs: interior target has wrong row count");
  if (system.boundary_rows > 0 && boundary_target.rows() != system.boundary_rows)
    throw std::invalid_argument("stack_rhs: boundary target has wrong row count");
  Matrix rhs = Matrix::Zero(system.rows(), interior_target.cols());
  rhs.topRows(system.interior_rows) = system.interior_scale * interior_target;
  if (system.boundary_rows > 0)
    rhs.middleRows(system.interior_rows, system.boundary_rows) = system.boundary_scale * boundary_target;
  return rhs;
}

QrCache factorize(const LsqSystem& system, std::uint64_t fingerprint) {
  QrCache cache;
  auto design = std::make_shared<const Matrix>(system.design);
  auto cod = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(*design);
  cache.rank = cod->rank();
  cache.factorization = std::move(cod);
  cache.design = std::move(design);
  cache.fingerprint = fingerprint;
  cache.underdetermined = system.interior_rows + system.boundary_rows < system.columns();
  if (cache.underdetermined)
    std::cerr << "warning: least-squares system has fewer data rows (" << system.interior_rows + system.boundary_rows
              << ") than columns (" << system.columns() << ")\n";
  return cache;
}

Matrix solve_coefficients(const QrCache& cache, const Matrix& rhs) {
  if (!cache.factorization) throw std::invalid_argument("solve: empty cache");
  if (rhs.rows() != cache.rows()) throw std::invalid_argument("solve: rhs length does not match system rows");
  if (!rhs.allFinite()) throw std::invalid_argument("solve: non-finite right-hand side");
  return cache.factorization->solve(rhs);
}

LsqSolution solve(const QrCache& cache, const Matrix& rhs) {
  LsqSolution sol;
  sol.theta = solve_coefficients(cache, rhs);
  sol.residual_norm = ((*cache.design) * sol.theta - rhs).norm();
  return sol;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  }
  template <class M>
  void matrix(const M& m) {
    const long dims[2] = {static_cast<long>(m.rows()), static_cast<long>(m.cols())};
    bytes(dims, sizeof dims);
    bytes(m.data(), sizeof(typename M::Scalar) * m.size());
  }
};

}  // namespace

std::uint64_t fingerprint_of(const RnbModel& model, const Matrix& interior, const Matrix& boundary,
                             std::string_view tag) {
  Fnv1a f;
  for (const auto& layer : model.hidden.layers) {
    f.matrix(layer.weight);
    f.matrix(layer.bias);
  }
  if (model.feature_map) {
    f.matrix(model.feature_map->multipliers);
    f.bytes(model.feature_map->period.data(), sizeof(double) * model.feature_map->period.size());
  }
  if (model.scale) f.bytes(model.scale->scales.data(), sizeof(int) * model.scale->scales.size());
  f.matrix(interior);
  f.matrix(boundary);
  f.bytes(tag.data(), tag.size());
  return f.h;
}

}  // namespace sdtm
