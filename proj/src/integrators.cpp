#include "sdtm/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace sdtm {

SchemeId parse_scheme(std::string_view name, double beta) {
  SchemeId s;
  s.beta = beta;
  if (name == "euler") s.kind = SchemeKind::EulerExplicit;
  else if (name == "euler-implicit") s.kind = SchemeKind::EulerImplicit;
  else if (name == "rk2") s.kind = SchemeKind::RK2;
  else if (name == "rk4") s.kind = SchemeKind::RK4;
  else if (name == "bdf2") s.kind = SchemeKind::BDF2Implicit;
  else if (name == "bdf4") s.kind = SchemeKind::BDF4Implicit;
  else if (name == "exbdf2") s.kind = SchemeKind::ExBDF2Beta;
  else if (name == "exbdf4") s.kind = SchemeKind::ExBDF4Beta;
  else throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
  if ((s.kind == SchemeKind::ExBDF2Beta || s.kind == SchemeKind::ExBDF4Beta) && !(beta >= 1.0))
    throw std::invalid_argument("Ex-BDF schemes need beta >= 1");
  return s;
}

std::string scheme_name(const SchemeId& scheme) {
  switch (scheme.kind) {
    case SchemeKind::EulerExplicit: return "euler";
    case SchemeKind::EulerImplicit: return "euler-implicit";
    case SchemeKind::RK2: return "rk2";
    case SchemeKind::RK4: return "rk4";
    case SchemeKind::BDF2Implicit: return "bdf2";
    case SchemeKind::BDF4Implicit: return "bdf4";
    case SchemeKind::ExBDF2Beta: return "exbdf2";
    case SchemeKind::ExBDF4Beta: return "exbdf4";
  }
  return "?";
}

int scheme_steps(const SchemeId& scheme) {
  switch (scheme.kind) {
    case SchemeKind::BDF2Implicit:
    case SchemeKind::ExBDF2Beta: return 2;
    case SchemeKind::BDF4Implicit:
    case SchemeKind::ExBDF4Beta: return 4;
    default: return 1;
  }
}

int scheme_order(const SchemeId& scheme) {
  switch (scheme.kind) {
    case SchemeKind::EulerExplicit:
    case SchemeKind::EulerImplicit: return 1;
    case SchemeKind::RK2:
    case SchemeKind::BDF2Implicit:
    case SchemeKind::ExBDF2Beta: return 2;
    default: return 4;
  }
}

bool is_implicit(const SchemeId& scheme) {
  return scheme.kind == SchemeKind::EulerImplicit || scheme.kind == SchemeKind::BDF2Implicit ||
         scheme.kind == SchemeKind::BDF4Implicit;
}

std::vector<double> bdf_weights(int k) {
  if (k == 2) return {3.0 / 2.0, -2.0, 1.0 / 2.0};
  if (k == 4) return {25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 1.0 / 4.0};
  throw std::invalid_argument("bdf_weights: only k = 2 and k = 4 are supported");
}

namespace {

// Lagrange basis weights at x (deriv = 0) or their derivative (deriv = 1).
std::vector<double> lagrange_weights(const std::vector<double>& nodes, double x, int deriv) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double denom = 1.0;
    for (std::size_t m = 0; m < n; ++m)
      if (m != j) denom *= nodes[j] - nodes[m];
    if (deriv == 0) {
      double num = 1.0;
      for (std::size_t m = 0; m < n; ++m)
        if (m != j) num *= x - nodes[m];
      w[j] = num / denom;
    } else {
      double sum = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        if (m == j) continue;
        double prod = 1.0;
        for (std::size_t l = 0; l < n; ++l)
          if (l != j && l != m) prod *= x - nodes[l];
        sum += prod;
      }
      w[j] = sum / denom;
    }
  }
  return w;
}

void check_k_beta(int k, double beta) {
  if (k != 2 && k != 4) throw std::invalid_argument("BDF-beta: only k = 2 and k = 4 are supported");
  if (!(beta >= 1.0)) throw std::invalid_argument("BDF-beta: beta must be >= 1");
}

}  // namespace

std::vector<double> bdf_beta_lhs(int k, double beta) {
  check_k_beta(k, beta);
  std::vector<double> nodes(k + 1);
  for (int j = 0; j <= k; ++j) nodes[j] = 1.0 - j;
  return lagrange_weights(nodes, beta, 1);
}

std::vector<double> bdf_beta_extrapolation(int k, double beta) {
  check_k_beta(k, beta);
  std::vector<double> nodes(k);
  for (int j = 0; j < k; ++j) nodes[j] = -static_cast<double>(j);
  return lagrange_weights(nodes, beta, 0);
}

void HistoryBuffer::push(HistoryState state) {
  if (!states_.empty()) {
    const double t_new = state.t, t_last = states_.front().t;
    if (!(t_new > t_last)) throw std::invalid_argument("HistoryBuffer: times must increase");
    if (states_.size() >= 2) {
      const double dt_prev = t_last - states_[1].t;
      if (std::abs((t_new - t_last) - dt_prev) > 1e-9 * std::max(1.0, std::abs(dt_prev)))
        throw std::invalid_argument("HistoryBuffer: time step must be constant");
    }
  }
  states_.push_front(std::move(state));
  while (states_.size() > capacity_) states_.pop_back();
}

namespace {

FieldWithDerivs combine_fields(const HistoryBuffer& h, const std::vector<double>& w) {
  FieldWithDerivs out = h.at(0).field;
  out.u *= w[0];
  for (auto& m : out.du) m *= w[0];
  for (auto& m : out.d2u) m *= w[0];
  for (std::size_t j = 1; j < w.size(); ++j) {
    const FieldWithDerivs& f = h.at(j).field;
    if (f.du.size() != out.du.size() || f.d2u.size() != out.d2u.size())
      throw std::invalid_argument("history fields carry different derivative orders");
    out.u += w[j] * f.u;
    for (std::size_t d = 0; d < out.du.size(); ++d) out.du[d] += w[j] * f.du[d];
    for (std::size_t d = 0; d < out.d2u.size(); ++d) out.d2u[d] += w[j] * f.d2u[d];
  }
  return out;
}

void guard_finite(const Matrix& m, long step, const char* what) {
  if (!m.allFinite()) throw DivergenceError(step, std::string("non-finite ") + what);
}

struct Tableau {
  std::vector<std::vector<double>> a;  // stage i uses a[i][j], j < i
  std::vector<double> b;
  std::vector<double> c;
};

Tableau tableau_for(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::EulerExplicit: return {{{}}, {1.0}, {0.0}};
    case SchemeKind::RK2: return {{{}, {1.0}}, {0.5, 0.5}, {0.0, 1.0}};
    case SchemeKind::RK4:
      return {{{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}}, {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}, {0.0, 0.5, 0.5, 1.0}};
    default: throw std::logic_error("no tableau for multistep scheme");
  }
}

TargetRecipe::StateRef ref_of(const HistoryState& s, double weight) { return {s.model, s.coeffs, weight}; }

}  // namespace

TargetField build_target(const SchemeId& scheme, const HistoryBuffer& history, const FieldSpace& space,
                         const OperatorFn& op, double dt, long step) {
  if (!(dt > 0)) throw std::invalid_argument("build_target: dt must be positive");
  if (is_implicit(scheme)) throw UnsupportedError("build_target: implicit schemes are assembled, not targeted");
  const int k = scheme_steps(scheme);
  if (static_cast<int>(history.size()) < k)
    throw std::invalid_argument("build_target: history holds fewer states than the scheme needs");

  const HistoryState& now = history.newest();
  TargetField target;
  target.time = now.t + dt;

  if (scheme.kind == SchemeKind::ExBDF2Beta || scheme.kind == SchemeKind::ExBDF4Beta) {
    const auto lhs = bdf_beta_lhs(k, scheme.beta);
    const auto ext = bdf_beta_extrapolation(k, scheme.beta);
    const double c0 = lhs[0];
    const double t_rhs = now.t + scheme.beta * dt;
    Matrix rhs = dt * op(combine_fields(history, ext), t_rhs);
    guard_finite(rhs, step, "operator value");
    TargetRecipe::OperatorTerm term{{}, dt / c0, t_rhs};
    for (int j = 0; j < k; ++j) term.state.push_back(ref_of(history.at(j), ext[j]));
    target.recipe.operator_terms.push_back(std::move(term));
    for (int j = 1; j <= k; ++j) {
      rhs -= lhs[j] * history.at(j - 1).values();
      target.recipe.value_terms.push_back(ref_of(history.at(j - 1), -lhs[j] / c0));
    }
    target.values = rhs / c0;
  } else {
    const Tableau tab = tableau_for(scheme.kind);
    const std::size_t stages = tab.b.size();
    std::vector<Matrix> slopes;
    Matrix acc = now.values();
    for (std::size_t i = 0; i < stages; ++i) {
      const double ti = now.t + tab.c[i] * dt;
      if (i == 0) {
        slopes.push_back(op(now.field, ti));
        target.recipe.operator_terms.push_back({{ref_of(now, 1.0)}, dt * tab.b[i], ti});
      } else {
        Matrix stage_values = now.values();
        for (std::size_t j = 0; j < i; ++j)
          if (tab.a[i][j] != 0.0) stage_values += dt * tab.a[i][j] * slopes[j];
        guard_finite(stage_values, step, "stage value");
        Matrix coeffs = space.project(stage_values, ti);
        ++target.projections;
        slopes.push_back(op(space.evaluate(coeffs), ti));
        target.recipe.operator_terms.push_back({{{space.model(), std::move(coeffs), 1.0}}, dt * tab.b[i], ti});
      }
      guard_finite(slopes.back(), step, "stage slope");
      acc += dt * tab.b[i] * slopes.back();
    }
    target.recipe.value_terms.push_back(ref_of(now, 1.0));
    target.values = std::move(acc);
  }
  guard_finite(target.values, step, "target");
  return target;
}

Matrix evaluate_recipe(const TargetRecipe& recipe, const Matrix& points, int order, const OperatorFn& op) {
  std::vector<std::pair<const RnbModel*, BasisEvaluation>> evals;
  auto field_of = [&](const TargetRecipe::StateRef& ref) {
    if (!ref.model) throw std::invalid_argument("evaluate_recipe: state without a model");
    auto it = std::find_if(evals.begin(), evals.end(), [&](const auto& e) { return e.first == ref.model.get(); });
    if (it == evals.end()) {
      evals.emplace_back(ref.model.get(), evaluate_basis(*ref.model, points, order));
      it = std::prev(evals.end());
    }
    const BasisEvaluation& ev = it->second;
    const long m = ev.basis_count();
    const auto w = ref.coeffs.topRows(m);
    FieldWithDerivs f;
    f.u = ev.values * w;
    f.u.rowwise() += ref.coeffs.row(m);
    for (const auto& g : ev.grad) f.du.push_back(g * w);
    for (const auto& s : ev.lap_terms) f.d2u.push_back(s * w);
    return f;
  };
  auto scaled_sum = [&](const std::vector<TargetRecipe::StateRef>& refs) {
    FieldWithDerivs acc;
    for (const auto& r : refs) {
      FieldWithDerivs f = field_of(r);
      if (acc.u.size() == 0) {
        acc.u = r.weight * f.u;
        for (auto& m : f.du) acc.du.push_back(r.weight * m);
        for (auto& m : f.d2u) acc.d2u.push_back(r.weight * m);
      } else {
        acc.u += r.weight * f.u;
        for (std::size_t d = 0; d < acc.du.size(); ++d) acc.du[d] += r.weight * f.du[d];
        for (std::size_t d = 0; d < acc.d2u.size(); ++d) acc.d2u[d] += r.weight * f.d2u[d];
      }
    }
    return acc;
  };
  Matrix out;
  auto add = [&out](const Matrix& m, double w) {
    if (out.size() == 0) out = w * m;
    else out += w * m;
  };
  for (const auto& v : recipe.value_terms) add(field_of(v).u, v.weight);
  for (const auto& o : recipe.operator_terms) add(op(scaled_sum(o.state), o.t), o.weight);
  return out;
}

std::vector<double> implicit_lhs(const SchemeId& scheme) {
  switch (scheme.kind) {
    case SchemeKind::EulerImplicit: return {1.0, -1.0};
    case SchemeKind::BDF2Implicit: return bdf_weights(2);
    case SchemeKind::BDF4Implicit: return bdf_weights(4);
    default: throw std::invalid_argument("implicit_lhs: scheme is explicit");
  }
}

Matrix implicit_design_rows(const SchemeId& scheme, const Matrix& basis_rows, const Matrix& operator_rows, double dt,
                            bool linear_operator) {
  if (!linear_operator)
    throw UnsupportedError("implicit schemes are only assembled for linear operators; use an explicit scheme");
  if (basis_rows.rows() != operator_rows.rows() || basis_rows.cols() != operator_rows.cols())
    throw std::invalid_argument("implicit_design_rows: basis/operator row blocks differ in shape");
  const auto c = implicit_lhs(scheme);
  return c[0] * basis_rows - dt * operator_rows;
}

Matrix implicit_rhs(const SchemeId& scheme, const HistoryBuffer& history, const Matrix& affine, double dt) {
  const auto c = implicit_lhs(scheme);
  const std::size_t k = c.size() - 1;
  if (history.size() < k) throw std::invalid_argument("implicit_rhs: not enough history");
  Matrix rhs = dt * affine;
  for (std::size_t j = 1; j <= k; ++j) rhs -= c[j] * history.at(j - 1).values();
  return rhs;
}

ImplicitRows implicit_assemble(const SchemeId& scheme, const HistoryBuffer& history, const Matrix& basis_rows,
                               const Matrix& operator_rows, const Matrix& affine, double dt, bool linear_operator) {
  ImplicitRows rows;
  rows.design_rows = implicit_design_rows(scheme, basis_rows, operator_rows, dt, linear_operator);
  rows.rhs = implicit_rhs(scheme, history, affine, dt);
  rows.time = history.newest().t + dt;
  return rows;
}

}  // namespace sdtm
