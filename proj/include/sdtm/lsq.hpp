#pragma once

// Weighted, ridge-regularized least squares over a frozen basis.
//
// Row blocks of the stacked design:
//   interior  sqrt(1/N)          * A_int
//   boundary  sqrt(lambda_bc/Nb) * A_bdy
//   ridge     sqrt(lambda)       * I
// so that ||design * theta - rhs||^2 equals the training loss exactly.

#include "sdtm/basis.hpp"
#include "sdtm/types.hpp"

#include <cstdint>
#include <memory>
#include <string_view>

namespace sdtm {


enum class BoundaryRowKind { None, Value, PeriodicPair };

struct LsqSystem {
  Matrix design;
  long interior_rows = 0;
  long boundary_rows = 0;
  long ridge_rows = 0;
  double interior_scale = 1.0;
  double boundary_scale = 0.0;
  double ridge_scale = 0.0;

  long rows() const { return design.rows(); }
  long columns() const { return design.cols(); }
};

/// Basis block with the all-ones output-bias column appended.
Matrix with_bias_column(const Matrix& values);
/// Derivative block: the bias column differentiates to zero.
Matrix with_zero_column(const Matrix& values);

/// Unscaled boundary rows for a boundary evaluation laid out as by boundary_sample().
///
/// Value: one row per point (basis values). PeriodicPair: for every lo/hi
/// partner pair, a value-difference row and a normal-derivative-difference row.
Matrix boundary_block(const BasisEvaluation& boundary, BoundaryRowKind kind, int dim);

/// Number of rows boundary_block() produces for `n_points` boundary points.
long boundary_block_rows(long n_points, BoundaryRowKind kind);

LsqSystem assemble_design(const Matrix& interior_block, const Matrix& boundary_block, double lambda_bc,
                          double lambda);

LsqSystem assemble_design(const BasisEvaluation& interior, const BasisEvaluation* boundary, BoundaryRowKind kind,
                          double lambda_bc, double lambda);

/// Right-hand side matching the system's row scaling; ridge rows are zero.
/// `boundary_target` may be empty when the system has no boundary rows.
Matrix stack_rhs(const LsqSystem& system, const Matrix& interior_target, const Matrix& boundary_target);

/// Reusable factorization of a stacked design.
struct QrCache {
  std::shared_ptr<const Eigen::CompleteOrthogonalDecomposition<Matrix>> factorization;
  std::shared_ptr<const Matrix> design;
  std::uint64_t fingerprint = 0;
  long rank = 0;
  bool underdetermined = false;

  long rows() const { return design ? design->rows() : 0; }
  long columns() const { return design ? design->cols() : 0; }
  bool rank_deficient() const { return rank < columns(); }
};

QrCache factorize(const LsqSystem& system, std::uint64_t fingerprint = 0);

struct LsqSolution {
  Matrix theta;
  double residual_norm = 0.0;
};

/// Minimum-norm least-squares solution for every rhs column.
LsqSolution solve(const QrCache& cache, const Matrix& rhs);
/// Same as solve() without computing the residual.
Matrix solve_coefficients(const QrCache& cache, const Matrix& rhs);

/// FNV-1a over hidden parameters, collocation points and a configuration tag.
std::uint64_t fingerprint_of(const RnbModel& model, const Matrix& interior, const Matrix& boundary,
                             std::string_view tag);

}  // namespace sdtm
