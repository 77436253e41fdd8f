#pragma once

// Time integrators that turn history states into the next supervised target.
//
// States live in coefficient space of the current basis. Explicit schemes
// produce target values at the collocation points together with a recipe that
// re-evaluates the same target at any other point set; implicit schemes for
// linear operators are folded into the least-squares rows instead.

#include "sdtm/basis.hpp"
#include "sdtm/problems.hpp"
#include "sdtm/types.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sdtm {

enum class SchemeKind { EulerExplicit, EulerImplicit, RK2, RK4, BDF2Implicit, BDF4Implicit, ExBDF2Beta, ExBDF4Beta };

struct SchemeId {
  SchemeKind kind = SchemeKind::RK4;
  double beta = 2.0;  // Ex-BDF only
};

/// Names: euler, euler-implicit, rk2, rk4, bdf2, bdf4, exbdf2, exbdf4.
SchemeId parse_scheme(std::string_view name, double beta = 2.0);
std::string scheme_name(const SchemeId& scheme);
int scheme_steps(const SchemeId& scheme);
int scheme_order(const SchemeId& scheme);
bool is_implicit(const SchemeId& scheme);

/// Left-hand side of the k-step BDF relation, newest state (u^{n+1}) first.
std::vector<double> bdf_weights(int k);

/// BDF relation differenced at t_{n+beta}: derivative at s = beta of the
/// degree-k interpolant through s = 1, 0, -1, ..., 1-k. Newest first.
std::vector<double> bdf_beta_lhs(int k, double beta);

/// Explicit extrapolation of u(t_{n+beta}) from u^n, ..., u^{n-k+1}. Newest first.
std::vector<double> bdf_beta_extrapolation(int k, double beta);

/// A past solution: its coefficients in the basis it was solved in, and the
/// field with derivatives cached at the interior collocation points.
struct HistoryState {
  Matrix coeffs;  // (M+1) x d
  FieldWithDerivs field;
  double t = 0.0;
  std::shared_ptr<const RnbModel> model;  // may be null outside the driver

  const Matrix& values() const { return field.u; }
};

/// Last few states, newest at index 0. Enforces increasing, equally spaced times.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(HistoryState state);
  void clear() { states_.clear(); }

  std::size_t size() const { return states_.size(); }
  std::size_t capacity() const { return capacity_; }
  const HistoryState& at(std::size_t age) const { return states_.at(age); }
  HistoryState& at(std::size_t age) { return states_.at(age); }
  const HistoryState& newest() const { return states_.front(); }

 private:
  std::size_t capacity_;
  std::deque<HistoryState> states_;
};

/// Evaluates coefficient blocks at a fixed point set.
class FieldEvaluator {
 public:
  virtual ~FieldEvaluator() = default;
  virtual FieldWithDerivs evaluate(const Matrix& coeffs) const = 0;
};

/// A field evaluator that can also fit point values back into coefficients.
class FieldSpace : public FieldEvaluator {
 public:
  /// Least-squares coefficients for `values` at the collocation points, with
  /// boundary rows taken at time `t`.
  virtual Matrix project(const Matrix& values, double t) const = 0;
  /// Model the coefficients refer to (null if the space is not network based).
  virtual std::shared_ptr<const RnbModel> model() const { return nullptr; }
};

using OperatorFn = std::function<Matrix(const FieldWithDerivs& field, double t)>;

/// target = sum_i w_i u_i + sum_j v_j F(sum_l e_jl u_jl, t_j), every u given by
/// a model and its coefficients.
struct TargetRecipe {
  struct StateRef {
    std::shared_ptr<const RnbModel> model;
    Matrix coeffs;
    double weight = 1.0;
  };
  struct OperatorTerm {
    std::vector<StateRef> state;
    double weight;
    double t;
  };
  std::vector<StateRef> value_terms;
  std::vector<OperatorTerm> operator_terms;
};

struct TargetField {
  Matrix values;  // N x d at interior collocation points
  double time = 0.0;
  TargetRecipe recipe;
  int projections = 0;  // stage re-projections performed
};

/// Explicit target for the step t_n -> t_n + dt. Runge-Kutta stages are
/// re-projected onto the basis so that they can be differentiated.
/// Throws DivergenceError (tagged with `step`) on non-finite values.
TargetField build_target(const SchemeId& scheme, const HistoryBuffer& history, const FieldSpace& space,
                         const OperatorFn& op, double dt, long step = -1);

/// Re-evaluates a recipe at `points` with derivatives up to `order`; `op` must
/// belong to that point set.
Matrix evaluate_recipe(const TargetRecipe& recipe, const Matrix& points, int order, const OperatorFn& op);

/// Coefficients of c_0 u^{n+1} + sum_j c_j u^{n+1-j} = dt L u^{n+1} for implicit schemes.
std::vector<double> implicit_lhs(const SchemeId& scheme);

struct ImplicitRows {
  Matrix design_rows;  // c_0 Phi - dt L[Phi]
  Matrix rhs;          // -sum_{j>=1} c_j u^{n+1-j} + dt * affine part
  double time = 0.0;
};

/// Interior rows of an implicit step for an affine operator F(u) = L u + g.
/// `basis_rows` and `operator_rows` carry the bias column. Throws
/// UnsupportedError if the operator is not linear.
Matrix implicit_design_rows(const SchemeId& scheme, const Matrix& basis_rows, const Matrix& operator_rows, double dt,
                            bool linear_operator);
Matrix implicit_rhs(const SchemeId& scheme, const HistoryBuffer& history, const Matrix& affine, double dt);
ImplicitRows implicit_assemble(const SchemeId& scheme, const HistoryBuffer& history, const Matrix& basis_rows,
                               const Matrix& operator_rows, const Matrix& affine, double dt, bool linear_operator);

}  // namespace sdtm
