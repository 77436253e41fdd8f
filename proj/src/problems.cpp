#include "sdtm/problems.hpp"

#include <cmath>
#include <numbers>

namespace sdtm {

using std::numbers::pi;

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::PeriodicHard: return "periodic-hard";
    case BoundaryKind::PeriodicSoft: return "periodic-soft";
    case BoundaryKind::DirichletSoft: return "dirichlet-soft";
    case BoundaryKind::NoSlipSoft: return "noslip-soft";
  }
  return "?";
}

BoundaryKind parse_boundary_kind(const std::string& name) {
  if (name == "periodic-hard") return BoundaryKind::PeriodicHard;
  if (name == "periodic-soft") return BoundaryKind::PeriodicSoft;
  if (name == "dirichlet-soft") return BoundaryKind::DirichletSoft;
  if (name == "noslip-soft") return BoundaryKind::NoSlipSoft;
  throw std::invalid_argument("unknown boundary kind '" + name + "'");
}

bool PdeProblem::linear() const {
  return op == OperatorKind::Zero || op == OperatorKind::Advection || op == OperatorKind::Heat;
}

int PdeProblem::derivative_order() const {
  switch (op) {
    case OperatorKind::Zero: return 0;
    case OperatorKind::Advection: return 1;
    default: return 2;
  }
}

namespace {

void require(const FieldWithDerivs& f, int order, int dim) {
  if (order >= 1 && static_cast<int>(f.du.size()) < dim)
    throw std::invalid_argument("apply_operator: first derivatives missing");
  if (order >= 2 && static_cast<int>(f.d2u.size()) < dim)
    throw std::invalid_argument("apply_operator: second derivatives missing");
}

Matrix laplacian(const FieldWithDerivs& f, int dim) {
  Matrix lap = f.d2u[0];
  for (int i = 1; i < dim; ++i) lap += f.d2u[i];
  return lap;
}

}  // namespace

Matrix apply_operator(const PdeProblem& problem, const FieldWithDerivs& f, const OperatorContext& ctx) {
  const int dim = problem.domain.dim();
  require(f, problem.derivative_order(), dim);
  const auto& p = problem.params;
  switch (problem.op) {
    case OperatorKind::Zero:
      return Matrix::Zero(f.u.rows(), f.u.cols());
    case OperatorKind::Advection:
      return -p.speed * f.du[0];
    case OperatorKind::Heat:
      return p.nu * laplacian(f, dim);
    case OperatorKind::Burgers:
      return (-f.u.array() * f.du[0].array() + p.nu * f.d2u[0].array()).matrix();
    case OperatorKind::AllenCahn: {
      const double e2 = p.epsilon * p.epsilon;
      return (e2 * laplacian(f, dim).array() + p.reaction * (f.u.array() - f.u.array().cube())).matrix();
    }
    case OperatorKind::NavierStokes: {
      if (dim != 2 || f.u.cols() != 2) throw std::invalid_argument("apply_operator: Navier-Stokes needs a 2D velocity");
      if (!ctx.points) throw std::invalid_argument("apply_operator: Navier-Stokes forcing needs points");
      Matrix out(f.u.rows(), 2);
      const auto u1 = f.u.col(0).array();
      const auto u2 = f.u.col(1).array();
      for (int c = 0; c < 2; ++c) {
        out.col(c) = (-(u1 * f.du[0].col(c).array() + u2 * f.du[1].col(c).array()) +
                      p.nu * (f.d2u[0].col(c).array() + f.d2u[1].col(c).array()))
                         .matrix();
      }
      if (ctx.pressure_grad) out -= *ctx.pressure_grad;
      out += ns_forcing(*ctx.points, ctx.t, p.nu);
      return out;
    }
  }
  throw std::logic_error("apply_operator: unhandled operator");
}

Matrix exact_solution(const PdeProblem& problem, const Matrix& points, double t) {
  if (!problem.exact) throw NotAvailableError("no closed-form solution for '" + problem.name + "'");
  return (*problem.exact)(points, t);
}

// --- Navier-Stokes manufactured solution --------------------------------------
//
// u1 =  sin(2 pi y) sin^2(pi x) sin t
// u2 = -sin(2 pi x) sin^2(pi y) sin t
// p  =  cos(pi x) sin(pi y) sin y
//
// Built from the 1D factors a(s) = sin^2(pi s), b(s) = sin(2 pi s) and their
// derivatives so that every term below is an exact closed form.

namespace {

struct Factor {
  double v, d1, d2;
};

Factor sin_sq(double s) {
  return {std::sin(pi * s) * std::sin(pi * s), pi * std::sin(2 * pi * s), 2 * pi * pi * std::cos(2 * pi * s)};
}

Factor sin_2pi(double s) {
  return {std::sin(2 * pi * s), 2 * pi * std::cos(2 * pi * s), -4 * pi * pi * std::sin(2 * pi * s)};
}

}  // namespace

NsExactFields ns_exact_fields(const Matrix& points, double t) {
  const long n = points.rows();
  NsExactFields e;
  e.velocity.resize(n, 2);
  e.velocity_t.resize(n, 2);
  e.grad.assign(2, Matrix(n, 2));
  e.second.assign(2, Matrix(n, 2));
  e.pressure.resize(n, 1);
  e.pressure_grad.resize(n, 2);
  e.pressure_laplacian.resize(n);
  const double st = std::sin(t), ct = std::cos(t);
  for (long i = 0; i < n; ++i) {
    const double x = points(i, 0), y = points(i, 1);
    const Factor ax = sin_sq(x), ay = sin_sq(y), bx = sin_2pi(x), by = sin_2pi(y);
    // u1 = by * ax * st
    e.velocity(i, 0) = by.v * ax.v * st;
    e.velocity_t(i, 0) = by.v * ax.v * ct;
    e.grad[0](i, 0) = by.v * ax.d1 * st;
    e.grad[1](i, 0) = by.d1 * ax.v * st;
    e.second[0](i, 0) = by.v * ax.d2 * st;
    e.second[1](i, 0) = by.d2 * ax.v * st;
    // u2 = -bx * ay * st
    e.velocity(i, 1) = -bx.v * ay.v * st;
    e.velocity_t(i, 1) = -bx.v * ay.v * ct;
    e.grad[0](i, 1) = -bx.d1 * ay.v * st;
    e.grad[1](i, 1) = -bx.v * ay.d1 * st;
    e.second[0](i, 1) = -bx.d2 * ay.v * st;
    e.second[1](i, 1) = -bx.v * ay.d2 * st;
    // p = cos(pi x) * g(y), g = sin(pi y) sin y
    const double cx = std::cos(pi * x), sx = std::sin(pi * x);
    const double g = std::sin(pi * y) * std::sin(y);
    const double g1 = pi * std::cos(pi * y) * std::sin(y) + std::sin(pi * y) * std::cos(y);
    const double g2 = -(pi * pi + 1) * std::sin(pi * y) * std::sin(y) + 2 * pi * std::cos(pi * y) * std::cos(y);
    e.pressure(i, 0) = cx * g;
    e.pressure_grad(i, 0) = -pi * sx * g;
    e.pressure_grad(i, 1) = cx * g1;
    e.pressure_laplacian(i) = -pi * pi * cx * g + cx * g2;
  }
  return e;
}

Matrix ns_forcing(const Matrix& points, double t, double nu) {
  const NsExactFields e = ns_exact_fields(points, t);
  Matrix f = e.velocity_t + e.pressure_grad;
  for (int c = 0; c < 2; ++c) {
    f.col(c).array() += e.velocity.col(0).array() * e.grad[0].col(c).array() +
                        e.velocity.col(1).array() * e.grad[1].col(c).array() -
                        nu * (e.second[0].col(c).array() + e.second[1].col(c).array());
  }
  return f;
}

Vector ns_forcing_divergence(const Matrix& points, double t, double /*nu*/) {
  // For a solenoidal field, div(u_t) = div(Laplacian u) = 0 and
  // div((u.grad)u) = sum_ij d_i u_j d_j u_i, leaving the quadratic form plus Laplacian(p).
  const NsExactFields e = ns_exact_fields(points, t);
  const auto u1x = e.grad[0].col(0).array(), u1y = e.grad[1].col(0).array();
  const auto u2x = e.grad[0].col(1).array(), u2y = e.grad[1].col(1).array();
  return (u1x.square() + 2 * u1y * u2x + u2y.square()).matrix() + e.pressure_laplacian;
}

Vector pressure_poisson_rhs(const FieldWithDerivs& velocity, const Vector& f_div) {
  if (velocity.du.size() < 2 || velocity.u.cols() != 2)
    throw std::invalid_argument("pressure_poisson_rhs: 2D velocity with first derivatives required");
  const auto u1x = velocity.du[0].col(0).array(), u1y = velocity.du[1].col(0).array();
  const auto u2x = velocity.du[0].col(1).array(), u2y = velocity.du[1].col(1).array();
  return (-(u1x.square() + 2 * u1y * u2x + u2y.square()) + f_div.array()).matrix();
}

// --- benchmarks ----------------------------------------------------------------

namespace {

PdeProblem blank(const std::string& name, Domain domain) {
  return PdeProblem{name, std::move(domain), 1, OperatorKind::Zero, {}, BoundaryKind::PeriodicHard, {}, {}, {}, false};
}

PdeProblem base_problem(const std::string& name) {
  if (name == "advection1d") {
    PdeProblem p = blank(name, Domain({-1.0}, {1.0}));
    p.op = OperatorKind::Advection;
    p.params.speed = 1.0;
    p.params.wave_number = 5.0;
    p.boundary = BoundaryKind::PeriodicHard;
    return p;
  }
  if (name == "burgers1d") {
    PdeProblem p = blank(name, Domain({-1.0}, {1.0}));
    p.op = OperatorKind::Burgers;
    p.params.nu = 0.01 / pi;
    p.boundary = BoundaryKind::PeriodicHard;
    p.has_spectral_reference = true;
    return p;
  }
  if (name == "ac1d-wave") {
    PdeProblem p = blank(name, Domain({-1.0}, {1.0}));
    p.op = OperatorKind::AllenCahn;
    p.params.epsilon = 0.01;
    p.params.reaction = 1.0;
    p.boundary = BoundaryKind::DirichletSoft;
    return p;
  }
  if (name == "ac1d-scaled") {
    PdeProblem p = blank(name, Domain({-1.0}, {1.0}));
    p.op = OperatorKind::AllenCahn;
    p.params.epsilon = 0.01;
    p.params.reaction = 5.0;
    p.boundary = BoundaryKind::PeriodicHard;
    p.has_spectral_reference = true;
    return p;
  }
  if (name == "ac2d") {
    PdeProblem p = blank(name, Domain({-1.0, -1.0}, {1.0, 1.0}));
    p.op = OperatorKind::AllenCahn;
    p.params.epsilon = 0.1;
    p.params.reaction = 1.0;
    p.boundary = BoundaryKind::PeriodicHard;
    return p;
  }
  if (name == "ns2d") {
    PdeProblem p = blank(name, Domain({0.0, 0.0}, {1.0, 1.0}));
    p.op = OperatorKind::NavierStokes;
    p.out_dim = 2;
    p.params.nu = 1.0;
    p.boundary = BoundaryKind::NoSlipSoft;
    return p;
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

Matrix pointwise(const Matrix& pts, const std::function<double(const double*)>& fn) {
  Matrix out(pts.rows(), 1);
  for (long i = 0; i < pts.rows(); ++i) {
    const RowVector row = pts.row(i);
    out(i, 0) = fn(row.data());
  }
  return out;
}

}  // namespace

void bind_problem_data(PdeProblem& p) {
  const OperatorParams prm = p.params;
  p.exact.reset();
  p.boundary_values.reset();
  if (p.name == "advection1d") {
    p.exact = [prm](const Matrix& x, double t) {
      return pointwise(x, [&](const double* q) { return std::sin(prm.wave_number * pi * (q[0] - prm.speed * t)); });
    };
    p.initial = [f = *p.exact](const Matrix& x, double) { return f(x, 0.0); };
  } else if (p.name == "burgers1d") {
    p.initial = [](const Matrix& x, double) { return pointwise(x, [](const double* q) { return -std::sin(pi * q[0]); }); };
  } else if (p.name == "ac1d-wave") {
    p.exact = [prm](const Matrix& x, double t) {
      const double s = 3.0 * prm.epsilon / std::sqrt(2.0);
      return pointwise(x, [&](const double* q) {
        return 0.5 * (1.0 - std::tanh((q[0] - s * t) / (2.0 * std::sqrt(2.0) * prm.epsilon)));
      });
    };
    p.initial = [f = *p.exact](const Matrix& x, double) { return f(x, 0.0); };
    p.boundary_values = [](const Matrix& x, double) {
      return pointwise(x, [](const double* q) { return q[0] < 0.0 ? 1.0 : 0.0; });
    };
  } else if (p.name == "ac1d-scaled") {
    p.initial = [](const Matrix& x, double) {
      return pointwise(x, [](const double* q) { return q[0] * q[0] * std::cos(pi * q[0]); });
    };
  } else if (p.name == "ac2d") {
    p.initial = [](const Matrix& x, double) {
      return pointwise(x, [](const double* q) { return 0.05 * std::sin(pi * q[0]) * std::sin(pi * q[1]); });
    };
  } else if (p.name == "ns2d") {
    p.exact = [](const Matrix& x, double t) {
      const NsExactFields e = ns_exact_fields(x, t);
      Matrix out(x.rows(), 3);
      out << e.velocity, e.pressure;
      return out;
    };
    p.initial = [](const Matrix& x, double) { return ns_exact_fields(x, 0.0).velocity; };
    p.boundary_values = [](const Matrix& x, double) { return Matrix(Matrix::Zero(x.rows(), 2)); };
  }
}

PdeProblem make_problem(const std::string& name, const ProblemOverrides& overrides) {
  PdeProblem p = base_problem(name);
  if (overrides.nu) p.params.nu = *overrides.nu;
  if (overrides.epsilon) p.params.epsilon = *overrides.epsilon;
  if (overrides.reaction) p.params.reaction = *overrides.reaction;
  if (overrides.speed) p.params.speed = *overrides.speed;
  if (overrides.wave_number) p.params.wave_number = *overrides.wave_number;
  if (overrides.boundary) p.boundary = *overrides.boundary;
  bind_problem_data(p);
  return p;
}

std::vector<std::string> problem_names() {
  return {"advection1d", "burgers1d", "ac1d-wave", "ac1d-scaled", "ac2d", "ns2d"};
}

double rel_l2(const Matrix& u, const Matrix& u_ref) {
  if (u.rows() != u_ref.rows() || u.cols() != u_ref.cols()) throw std::invalid_argument("rel_l2: shape mismatch");
  const double denom = u_ref.norm();
  if (!(denom > 0.0)) throw std::invalid_argument("rel_l2: reference has zero norm");
  return (u - u_ref).norm() / denom;
}

double linf(const Matrix& u, const Matrix& u_ref) {
  if (u.rows() != u_ref.rows() || u.cols() != u_ref.cols()) throw std::invalid_argument("linf: shape mismatch");
  if (u.size() == 0) return 0.0;
  return (u - u_ref).cwiseAbs().maxCoeff();
}

}  // namespace sdtm
