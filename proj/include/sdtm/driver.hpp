#pragma once

// Time marching: initial fit, per-step target construction, optional
// re-initialization of the basis, least-squares solve and error tracking.

#include "sdtm/adaptive.hpp"
#include "sdtm/basis.hpp"
#include "sdtm/geometry.hpp"
#include "sdtm/integrators.hpp"
#include "sdtm/lsq.hpp"
#include "sdtm/problems.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sdtm {

enum class FourierMode { Auto, Off, Custom };

struct NetworkConfig {
  std::vector<int> hidden{100};
  double r = 1.0;
  FourierMode fourier = FourierMode::Auto;
  IntMatrix multipliers;           // used with FourierMode::Custom
  std::optional<int> scale_n_max;  // multi-scale first layer
};

/// Draws a model for `problem` as the solver would (feature map from the
/// network's Fourier mode, optional multi-scale first layer).
RnbModel draw_network(const NetworkConfig& net, const PdeProblem& problem, int out_dim, double r, Seed seed);

struct SamplingConfig {
  std::string kind = "uniform";  // uniform | lhs
  std::vector<int> counts;       // uniform: points per dim (default 1001 / 101x101)
  int lhs_points = 4000;
  int boundary_per_face = 32;    // 1D domains always use one point per end
};

enum class ReferenceSource { Auto, Exact, Spectral, None };

struct ReferenceConfig {
  ReferenceSource source = ReferenceSource::Auto;
  std::vector<int> test_counts;  // exact references: uniform test grid (default 513 / 65x65)
  int spectral_n = 4096;
  double spectral_dt = 1e-4;
  int spectral_test_points = 512;
  std::string cache_dir;  // spectral snapshot cache; empty disables it
};

struct SolverConfig {
  std::string problem = "advection1d";
  ProblemOverrides overrides;
  std::string scheme = "rk4";
  double beta = 2.0;
  double dt = 1e-3;
  double T = 1.0;
  NetworkConfig network;
  NetworkConfig pressure_network{{100}, 1.0, FourierMode::Off, {}, std::nullopt};
  SamplingConfig sampling;
  double lambda_bc = 1.0;
  double lambda = 1e-20;
  std::optional<AdaptivePolicy> adaptive;
  bool reinit_every_step = false;
  ReferenceConfig reference;
  Seed seed = 0;
  double divergence_threshold = 1e8;
  double init_abort_residual = 1e-1;
  int error_every = 1;                 // evaluate errors every k steps (and at the end)
  std::vector<double> snapshot_times;

  /// Number of steps; throws ConfigError unless T is a multiple of dt.
  long step_count() const;
  void validate() const;
};

struct RunRow {
  long step = 0;
  double t = 0.0;
  double fit_residual = 0.0;
  double rel_l2 = 0.0;
  double linf = 0.0;
  double r_current = 0.0;
  bool reinit = false;
  double wall_ms = 0.0;
  int solves = 0;
  std::vector<double> component_rel_l2;
};

struct Snapshot {
  double t = 0.0;
  Matrix points;
  Matrix values;
};

struct RunRecord {
  std::vector<RunRow> rows;
  std::vector<std::string> components;
  std::vector<Snapshot> snapshots;
  double final_rel_l2 = std::numeric_limits<double>::quiet_NaN();  // NaN without a reference
  double final_linf = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> final_component_rel_l2;
  double total_ms = 0.0;
  long reinit_count = 0;
  long factorizations = 0;
  long solves = 0;
};

class InitFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basis evaluated at fixed collocation points with a cached factorization of
/// the plain fitting system (values at interior points plus boundary rows).
class CollocationSpace : public FieldSpace {
 public:
  using BoundaryTarget = std::function<Matrix(double t)>;

  CollocationSpace(std::shared_ptr<const RnbModel> model, const Matrix& interior, const Matrix& boundary, BoundaryRowKind kind,
                   int order, double lambda_bc, double lambda, BoundaryTarget boundary_target,
                   bool factorize_fit = true);

  FieldWithDerivs evaluate(const Matrix& coeffs) const override;
  Matrix project(const Matrix& values, double t) const override;
  std::shared_ptr<const RnbModel> model() const override { return model_; }

  /// Fit with residual; counts as one least-squares solve.
  LsqSolution fit(const Matrix& interior_values, double t) const;
  Matrix rhs(const Matrix& interior_values, double t) const;
  /// Boundary row targets at time t (zeros for periodic pairs).
  Matrix boundary_values(double t, long cols) const;

  const LsqSystem& system() const { return system_; }
  const QrCache& cache() const { return cache_; }
  const Matrix& values() const { return values_; }       // N x (M+1), bias column last
  const std::vector<Matrix>& grad() const { return grad_; }
  const std::vector<Matrix>& second() const { return second_; }
  const Matrix& boundary_rows() const { return boundary_rows_; }
  BoundaryRowKind boundary_kind() const { return kind_; }
  long solves() const { return solves_; }

 private:
  std::shared_ptr<const RnbModel> model_;
  Matrix values_;
  std::vector<Matrix> grad_;
  std::vector<Matrix> second_;
  Matrix boundary_rows_;
  BoundaryRowKind kind_;
  LsqSystem system_;
  QrCache cache_;
  BoundaryTarget boundary_target_;
  mutable long solves_ = 0;
};

/// Basis evaluation at an arbitrary point set (test grids, spectra).
class PointEvaluator : public FieldEvaluator {
 public:
  PointEvaluator(const RnbModel& model, const Matrix& points, int order);
  FieldWithDerivs evaluate(const Matrix& coeffs) const override;

 private:
  BasisEvaluation eval_;
};

struct InitialFit {
  Matrix theta;
  double residual = 0.0;
};

/// Least-squares fit of u0 (at interior points) with boundary rows at t0.
/// Throws InitFailureError when the RMS interior residual exceeds `abort_above`.
InitialFit fit_initial(const CollocationSpace& space, const Matrix& u0, double t0, double abort_above);

/// RMS over interior points of (prediction - target).
double interior_rms(const CollocationSpace& space, const Matrix& theta, const Matrix& target);

class Solver {
 public:
  explicit Solver(SolverConfig config);
  ~Solver();

  /// Draws the basis, samples points and fits the initial condition (step 0).
  void initialize();
  /// Advances one step and appends a row to the record.
  void step();
  /// initialize() followed by step_count() steps.
  RunRecord run();

  const SolverConfig& config() const { return config_; }
  const PdeProblem& problem() const { return problem_; }
  const RunRecord& record() const { return record_; }
  double time() const;
  long step_index() const { return step_; }
  const RnbModel& model() const { return *model_; }
  const Matrix& coefficients() const;
  const CollocationSet& collocation() const { return points_; }

  /// Current solution (velocity for Navier-Stokes) at arbitrary points.
  Matrix predict(const Matrix& points) const;
  /// Navier-Stokes pressure at arbitrary points.
  Matrix predict_pressure(const Matrix& points) const;
  /// max |div u| of the Navier-Stokes velocity at the given points.
  double velocity_divergence_linf(const Matrix& points) const;

  /// Test points and reference values at time t (throws NotAvailableError without one).
  const Matrix& test_points() const { return test_points_; }
  Matrix reference_at(double t) const;

 private:
  struct Reference;

  RnbModel draw_model(double r, Seed seed) const;
  std::unique_ptr<CollocationSpace> make_space(std::shared_ptr<const RnbModel> model) const;
  void build_pressure();
  void solve_pressure(double t);
  Matrix operator_at(const FieldWithDerivs& f, double t, const Matrix* points, const Matrix* pgrad) const;
  void redraw(double r, Seed seed);
  void record_row(RunRow row, bool final_step);
  void take_snapshots(double t_now);
  Matrix pressure_grad_interior() const;
  long total_solves() const;
  Matrix solve_implicit(const SchemeId& scheme, double t_new, double& residual);

  SolverConfig config_;
  PdeProblem problem_;
  SchemeId scheme_;
  CollocationSet points_;
  BoundaryRowKind boundary_kind_ = BoundaryRowKind::None;
  std::shared_ptr<const RnbModel> model_;
  std::unique_ptr<CollocationSpace> space_;
  std::optional<QrCache> implicit_cache_;
  LsqSystem implicit_system_;
  HistoryBuffer history_{1};
  double r_current_ = 1.0;
  double prev_residual_ = 0.0;
  long step_ = -1;
  long retired_solves_ = 0;  // from replaced spaces, implicit and pressure solves
  long factorizations_ = 0;
  mutable std::unique_ptr<PointEvaluator> test_eval_;

  // Navier-Stokes pressure network
  std::shared_ptr<const RnbModel> pressure_model_;
  std::unique_ptr<CollocationSpace> pressure_space_;
  std::optional<QrCache> pressure_cache_;
  LsqSystem pressure_system_;
  Matrix pressure_theta_;
  mutable std::unique_ptr<PointEvaluator> test_eval_pressure_;

  Matrix test_points_;
  std::unique_ptr<Reference> reference_;
  RunRecord record_;
};

/// Convenience wrappers around Solver.
RunRecord run(const SolverConfig& config);
RunRecord run_ns(const SolverConfig& config);

/// Uniform test/analysis points used for error evaluation of a config.
Matrix default_test_grid(const Domain& domain, const std::vector<int>& counts);

}  // namespace sdtm
