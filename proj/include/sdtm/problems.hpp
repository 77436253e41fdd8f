#pragma once

// Benchmark PDEs u_t = F(u): operators, boundary kinds, initial/exact data and
// error metrics.

#include "sdtm/geometry.hpp"
#include "sdtm/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sdtm {

/// A field and its pure spatial derivatives at a point set (N x d each).
struct FieldWithDerivs {
  Matrix u;
  std::vector<Matrix> du;
  std::vector<Matrix> d2u;
};

enum class OperatorKind {
  Zero,         // F = 0
  Advection,    // -c u_x
  Heat,         // nu * Laplacian(u)
  Burgers,      // -u u_x + nu u_xx
  AllenCahn,    // eps^2 Laplacian(u) + a (u - u^3)
  NavierStokes  // -(u.grad)u + nu Laplacian(u) - grad p + f
};

enum class BoundaryKind { PeriodicHard, PeriodicSoft, DirichletSoft, NoSlipSoft };

std::string to_string(BoundaryKind kind);
BoundaryKind parse_boundary_kind(const std::string& name);

struct OperatorParams {
  double nu = 0.0;           // viscosity / diffusivity
  double epsilon = 0.0;      // Allen-Cahn interface parameter
  double reaction = 1.0;     // Allen-Cahn reaction scale a
  double speed = 1.0;        // advection speed c
  double wave_number = 5.0;  // advection data sin(k pi (x - c t))
};

/// Scalar/vector function of (points, t) -> N x d.
using SpaceTimeFn = std::function<Matrix(const Matrix& points, double t)>;

struct PdeProblem {
  std::string name;
  Domain domain;
  int out_dim = 1;
  OperatorKind op = OperatorKind::Zero;
  OperatorParams params;
  BoundaryKind boundary = BoundaryKind::PeriodicHard;
  SpaceTimeFn initial;
  std::optional<SpaceTimeFn> exact;
  /// Prescribed boundary values for Dirichlet/no-slip rows (defaults to exact, else zero).
  std::optional<SpaceTimeFn> boundary_values;
  bool has_spectral_reference = false;

  bool linear() const;
  int derivative_order() const;
  bool is_navier_stokes() const { return op == OperatorKind::NavierStokes; }
};

/// Extra inputs some operators need.
struct OperatorContext {
  const Matrix* points = nullptr;          // required for forcing terms
  double t = 0.0;
  const Matrix* pressure_grad = nullptr;   // N x 2, Navier-Stokes only
};

/// Pointwise F(u). For linear operators F is applied column by column, so a
/// field holding basis columns yields the operator rows of that basis.
Matrix apply_operator(const PdeProblem& problem, const FieldWithDerivs& f, const OperatorContext& ctx = {});

/// Exact solution at (points, t); throws NotAvailableError when there is none.
Matrix exact_solution(const PdeProblem& problem, const Matrix& points, double t);

struct ProblemOverrides {
  std::optional<double> nu;
  std::optional<double> epsilon;
  std::optional<double> reaction;
  std::optional<double> speed;
  std::optional<double> wave_number;
  std::optional<BoundaryKind> boundary;
};

/// Named benchmarks: advection1d, burgers1d, ac1d-wave, ac1d-scaled, ac2d, ns2d.
///
/// For ns2d the exact solution returns three columns (u1, u2, p).
PdeProblem make_problem(const std::string& name, const ProblemOverrides& overrides = {});
std::vector<std::string> problem_names();

/// Rebuilds initial/exact/boundary closures from the current parameters.
void bind_problem_data(PdeProblem& problem);

// --- Navier-Stokes manufactured solution --------------------------------------

struct NsExactFields {
  Matrix velocity;               // N x 2
  Matrix velocity_t;             // N x 2
  std::vector<Matrix> grad;      // d/dx, d/dy of velocity, each N x 2
  std::vector<Matrix> second;    // d2/dx2, d2/dy2 of velocity, each N x 2
  Matrix pressure;               // N x 1
  Matrix pressure_grad;          // N x 2
  Vector pressure_laplacian;     // N
};

NsExactFields ns_exact_fields(const Matrix& points, double t);

/// f = u_t + (u.grad)u - nu Laplacian(u) + grad p for the manufactured solution.
Matrix ns_forcing(const Matrix& points, double t, double nu);

/// Divergence of ns_forcing, from closed-form second derivatives.
Vector ns_forcing_divergence(const Matrix& points, double t, double nu);

/// Right-hand side of the pressure Poisson equation obtained by taking the
/// divergence of the momentum equation for a solenoidal velocity:
///   Laplacian(p) = -(u1_x^2 + 2 u1_y u2_x + u2_y^2) + div f.
Vector pressure_poisson_rhs(const FieldWithDerivs& velocity, const Vector& f_div);

// --- metrics -------------------------------------------------------------------

double rel_l2(const Matrix& u, const Matrix& u_ref);
double linf(const Matrix& u, const Matrix& u_ref);

}  // namespace sdtm
