#include "sdtm/driver.hpp"

#include "sdtm/spectral_ref.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace sdtm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

IntMatrix default_multipliers(int dim) {
  if (dim == 1) return IntMatrix::Constant(1, 1, 1);
  IntMatrix b = IntMatrix::Zero(2 * dim, dim);
  for (int d = 0; d < dim; ++d) {
    b(d, d) = 1;
    b(dim + d, d) = 2;
  }
  return b;
}

std::optional<FourierFeatureMap> feature_map_for(const NetworkConfig& net, const PdeProblem& p) {
  const int dim = p.domain.dim();
  IntMatrix b;
  switch (net.fourier) {
    case FourierMode::Off:
      if (p.boundary == BoundaryKind::PeriodicHard)
        throw ConfigError("network.fourier", "hard periodic boundaries need a Fourier feature layer");
      return std::nullopt;
    case FourierMode::Auto:
      if (p.boundary != BoundaryKind::PeriodicHard) return std::nullopt;
      b = default_multipliers(dim);
      break;
    case FourierMode::Custom:
      b = net.multipliers;
      if (b.cols() != dim) throw ConfigError("network.fourier", "multiplier columns must equal the domain dimension");
      break;
  }
  FourierFeatureMap map{b, {}};
  for (int d = 0; d < dim; ++d) map.period.push_back(p.domain.extent(d));
  map.validate();
  return map;
}

BoundaryRowKind row_kind_for(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::PeriodicHard: return BoundaryRowKind::None;
    case BoundaryKind::PeriodicSoft: return BoundaryRowKind::PeriodicPair;
    case BoundaryKind::DirichletSoft:
    case BoundaryKind::NoSlipSoft: return BoundaryRowKind::Value;
  }
  return BoundaryRowKind::None;
}

RnbModel draw(const NetworkConfig& net, const PdeProblem& p, int out_dim, double r, Seed seed) {
  auto fmap = feature_map_for(net, p);
  std::vector<int> widths{p.domain.dim()};
  if (fmap) widths.push_back(fmap->output_dim());
  widths.insert(widths.end(), net.hidden.begin(), net.hidden.end());
  widths.push_back(out_dim);
  std::optional<ScaleVector> scale;
  if (net.scale_n_max) scale = make_msrnb_scales(net.hidden.front(), *net.scale_n_max);
  return init_rnb(widths, r, std::move(fmap), std::move(scale), seed);
}

FieldWithDerivs apply_coeffs(const Matrix& values, const std::vector<Matrix>& grad, const std::vector<Matrix>& second,
                             const Matrix& coeffs) {
  FieldWithDerivs f;
  f.u = values * coeffs;
  for (const auto& g : grad) f.du.push_back(g * coeffs);
  for (const auto& s : second) f.d2u.push_back(s * coeffs);
  return f;
}

double safe_rel_l2(const Matrix& u, const Matrix& ref) {
  if (!(ref.norm() > 0)) return kNaN;
  return rel_l2(u, ref);
}

}  // namespace

RnbModel draw_network(const NetworkConfig& net, const PdeProblem& problem, int out_dim, double r, Seed seed) {
  return draw(net, problem, out_dim, r, seed);
}

// --- configuration ----------------------------------------------------------

long SolverConfig::step_count() const {
  if (!(dt > 0)) throw ConfigError("dt", "must be positive");
  if (!(T >= 0)) throw ConfigError("T", "must be non-negative");
  const long n = std::lround(T / dt);
  if (std::abs(n * dt - T) > 1e-12 * std::max(1.0, T)) throw ConfigError("T", "must be an integer multiple of dt");
  return n;
}

void SolverConfig::validate() const {
  step_count();
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), problem) == names.end())
    throw ConfigError("problem", "unknown problem '" + problem + "'");
  if (!(beta >= 1)) throw ConfigError("beta", "must be >= 1");
  try {
    parse_scheme(scheme, beta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scheme", e.what());
  }
  for (const auto* net : {&network, &pressure_network}) {
    const std::string key = net == &network ? "network" : "pressure_network";
    if (net->hidden.empty() || net->hidden.size() > 3) throw ConfigError(key + ".hidden", "need 1 to 3 hidden widths");
    for (int w : net->hidden)
      if (w < 1) throw ConfigError(key + ".hidden", "widths must be positive");
    if (!(net->r > 0)) throw ConfigError(key + ".r", "must be positive");
    if (net->scale_n_max && (*net->scale_n_max < 1 || *net->scale_n_max > net->hidden.front()))
      throw ConfigError(key + ".scale_n_max", "must lie in [1, first hidden width]");
  }
  if (sampling.kind != "uniform" && sampling.kind != "lhs") throw ConfigError("sampling.kind", "must be uniform or lhs");
  for (int c : sampling.counts)
    if (c < 2) throw ConfigError("sampling.counts", "need at least two points per dimension");
  if (sampling.lhs_points < 1) throw ConfigError("sampling.lhs_points", "must be positive");
  if (sampling.boundary_per_face < 1) throw ConfigError("sampling.boundary_per_face", "must be positive");
  if (!(lambda_bc >= 0)) throw ConfigError("lambda_bc", "must be non-negative");
  if (!(lambda >= 0)) throw ConfigError("lambda", "must be non-negative");
  if (adaptive) {
    try {
      adaptive->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("adaptive", e.what());
    }
  }
  if (error_every < 1) throw ConfigError("error_every", "must be >= 1");
  if (!(divergence_threshold > 0)) throw ConfigError("divergence_threshold", "must be positive");
  if (reference.spectral_n < 2 || (reference.spectral_n & (reference.spectral_n - 1)) != 0)
    throw ConfigError("reference.spectral_n", "must be a power of two");
  if (!(reference.spectral_dt > 0)) throw ConfigError("reference.spectral_dt", "must be positive");
  if (reference.spectral_test_points < 1 || reference.spectral_n % reference.spectral_test_points != 0)
    throw ConfigError("reference.spectral_test_points", "must divide spectral_n");
}

// --- spaces -------------------------------------------------------------------

CollocationSpace::CollocationSpace(std::shared_ptr<const RnbModel> model, const Matrix& interior,
                                   const Matrix& boundary, BoundaryRowKind kind, int order, double lambda_bc,
                                   double lambda, BoundaryTarget boundary_target, bool factorize_fit)
    : model_(std::move(model)), kind_(kind), boundary_target_(std::move(boundary_target)) {
  const RnbModel& net = *model_;
  const BasisEvaluation ev = evaluate_basis(net, interior, order);
  values_ = with_bias_column(ev.values);
  for (const auto& g : ev.grad) grad_.push_back(with_zero_column(g));
  for (const auto& s : ev.lap_terms) second_.push_back(with_zero_column(s));
  if (kind != BoundaryRowKind::None && boundary.rows() > 0) {
    const BasisEvaluation bev = evaluate_basis(net, boundary, kind == BoundaryRowKind::PeriodicPair ? 1 : 0);
    boundary_rows_ = boundary_block(bev, kind, static_cast<int>(interior.cols()));
  } else {
    boundary_rows_.resize(0, values_.cols());
  }
  if (factorize_fit) {
    system_ = assemble_design(values_, boundary_rows_, lambda_bc, lambda);
    cache_ = factorize(system_, fingerprint_of(net, interior, boundary, "fit"));
  }
}

FieldWithDerivs CollocationSpace::evaluate(const Matrix& coeffs) const {
  return apply_coeffs(values_, grad_, second_, coeffs);
}

Matrix CollocationSpace::boundary_values(double t, long cols) const {
  if (kind_ == BoundaryRowKind::PeriodicPair || !boundary_target_) return Matrix::Zero(boundary_rows_.rows(), cols);
  return boundary_target_(t);
}

Matrix CollocationSpace::rhs(const Matrix& interior_values, double t) const {
  Matrix bdy;
  if (system_.boundary_rows > 0) bdy = boundary_values(t, interior_values.cols());
  return stack_rhs(system_, interior_values, bdy);
}

LsqSolution CollocationSpace::fit(const Matrix& interior_values, double t) const {
  LsqSolution sol = solve(cache_, rhs(interior_values, t));
  ++solves_;
  return sol;
}

Matrix CollocationSpace::project(const Matrix& values, double t) const { return fit(values, t).theta; }

PointEvaluator::PointEvaluator(const RnbModel& model, const Matrix& points, int order)
    : eval_(evaluate_basis(model, points, order)) {}

FieldWithDerivs PointEvaluator::evaluate(const Matrix& coeffs) const {
  const long m = eval_.basis_count();
  const auto w = coeffs.topRows(m);
  const RowVector b = coeffs.row(m);
  FieldWithDerivs f;
  f.u = eval_.values * w;
  f.u.rowwise() += b;
  for (const auto& g : eval_.grad) f.du.push_back(g * w);
  for (const auto& s : eval_.lap_terms) f.d2u.push_back(s * w);
  return f;
}

double interior_rms(const CollocationSpace& space, const Matrix& theta, const Matrix& target) {
  const Matrix diff = space.values() * theta - target;
  return diff.norm() / std::sqrt(static_cast<double>(diff.rows()));
}

InitialFit fit_initial(const CollocationSpace& space, const Matrix& u0, double t0, double abort_above) {
  InitialFit out;
  out.theta = space.fit(u0, t0).theta;
  out.residual = interior_rms(space, out.theta, u0);
  if (!(out.residual <= abort_above))
    throw InitFailureError("initial fit residual " + std::to_string(out.residual) + " exceeds " +
                           std::to_string(abort_above));
  return out;
}

Matrix default_test_grid(const Domain& domain, const std::vector<int>& counts) {
  std::vector<int> c = counts;
  if (c.empty()) c.assign(domain.dim(), domain.dim() == 1 ? 513 : 65);
  if (static_cast<int>(c.size()) != domain.dim()) throw ConfigError("reference.test_counts", "one count per dimension");
  return uniform_grid(domain, c);
}

// --- solver -------------------------------------------------------------------

struct Solver::Reference {
  ReferenceSource source = ReferenceSource::None;
  std::vector<Matrix> by_step;  // spectral values at test points
  double dt = 0.0;
};

Solver::Solver(SolverConfig config) : config_(std::move(config)), problem_(make_problem(config_.problem, config_.overrides)) {
  config_.validate();
  scheme_ = parse_scheme(config_.scheme, config_.beta);
  if (is_implicit(scheme_) && !problem_.linear())
    throw UnsupportedError("scheme '" + config_.scheme + "' is only available for linear operators");
  if (config_.adaptive && config_.adaptive->grid_n < 2) throw ConfigError("adaptive.grid_n", "too small");
}

Solver::~Solver() = default;

double Solver::time() const { return history_.size() ? history_.newest().t : 0.0; }

const Matrix& Solver::coefficients() const { return history_.newest().coeffs; }

RnbModel Solver::draw_model(double r, Seed seed) const {
  return draw(config_.network, problem_, problem_.out_dim, r, seed);
}

std::unique_ptr<CollocationSpace> Solver::make_space(std::shared_ptr<const RnbModel> model) const {
  CollocationSpace::BoundaryTarget target;
  if (boundary_kind_ == BoundaryRowKind::Value) {
    const Matrix bpts = points_.boundary;
    const PdeProblem& p = problem_;
    const int d = p.out_dim;
    target = [bpts, &p, d](double t) -> Matrix {
      if (p.boundary_values) return (*p.boundary_values)(bpts, t).leftCols(d);
      if (p.exact) return (*p.exact)(bpts, t).leftCols(d);
      return Matrix::Zero(bpts.rows(), d);
    };
  }
  return std::make_unique<CollocationSpace>(model, points_.interior, points_.boundary, boundary_kind_,
                                            problem_.derivative_order(), config_.lambda_bc, config_.lambda,
                                            std::move(target));
}

Matrix Solver::operator_at(const FieldWithDerivs& f, double t, const Matrix* points, const Matrix* pgrad) const {
  OperatorContext ctx;
  ctx.points = points;
  ctx.t = t;
  ctx.pressure_grad = pgrad;
  return apply_operator(problem_, f, ctx);
}

long Solver::total_solves() const { return retired_solves_ + (space_ ? space_->solves() : 0); }

void Solver::initialize() {
  const Clock::time_point start = Clock::now();
  const Domain& dom = problem_.domain;
  const int dim = dom.dim();
  points_.seed = config_.seed;
  if (config_.sampling.kind == "lhs") {
    points_.interior = lhs_sample(dom, config_.sampling.lhs_points, config_.seed);
  } else {
    std::vector<int> counts = config_.sampling.counts;
    if (counts.empty()) counts.assign(dim, dim == 1 ? 1001 : 101);
    if (static_cast<int>(counts.size()) != dim) throw ConfigError("sampling.counts", "one count per dimension");
    points_.interior = uniform_grid(dom, counts);
  }
  boundary_kind_ = row_kind_for(problem_.boundary);
  if (boundary_kind_ != BoundaryRowKind::None)
    points_.boundary = boundary_sample(dom, dim == 1 ? 1 : config_.sampling.boundary_per_face, config_.seed + 1);
  else
    points_.boundary.resize(0, dim);

  r_current_ = config_.network.r;
  model_ = std::make_shared<const RnbModel>(draw_model(r_current_, config_.seed));
  space_ = make_space(model_);
  ++factorizations_;
  history_ = HistoryBuffer(static_cast<std::size_t>(std::max(1, scheme_steps(scheme_))));

  const Matrix u0 = problem_.initial(points_.interior, 0.0);
  const InitialFit init = fit_initial(*space_, u0, 0.0, config_.init_abort_residual);
  history_.push({init.theta, space_->evaluate(init.theta), 0.0, model_});
  prev_residual_ = init.residual;
  step_ = 0;

  if (problem_.is_navier_stokes()) {
    build_pressure();
    solve_pressure(0.0);
  }

  // reference
  reference_ = std::make_unique<Reference>();
  ReferenceSource src = config_.reference.source;
  if (src == ReferenceSource::Auto)
    src = problem_.exact ? ReferenceSource::Exact
                         : (problem_.has_spectral_reference ? ReferenceSource::Spectral : ReferenceSource::None);
  reference_->source = src;
  if (src == ReferenceSource::Exact) {
    if (!problem_.exact) throw ConfigError("reference.source", "problem has no exact solution");
    test_points_ = default_test_grid(dom, config_.reference.test_counts);
  } else if (src == ReferenceSource::Spectral) {
    const auto& rc = config_.reference;
    const long steps = config_.step_count();
    std::vector<double> times;
    for (long n = 0; n <= steps; ++n)
      if (n % config_.error_every == 0 || n == steps) times.push_back(n * config_.dt);
    const auto snaps = rc.cache_dir.empty()
                           ? spectral_solve(problem_, rc.spectral_n, rc.spectral_dt, config_.T, times)
                           : reference_snapshots(rc.cache_dir, problem_, rc.spectral_n, rc.spectral_dt, times);
    const int stride = rc.spectral_n / rc.spectral_test_points;
    test_points_.resize(rc.spectral_test_points, 1);
    for (int i = 0; i < rc.spectral_test_points; ++i) test_points_(i, 0) = snaps.front().x[i * stride];
    reference_->dt = config_.dt;
    reference_->by_step.assign(steps + 1, Matrix());
    for (const auto& s : snaps) {
      Matrix v(rc.spectral_test_points, 1);
      for (int i = 0; i < rc.spectral_test_points; ++i) v(i, 0) = s.u[i * stride];
      reference_->by_step[std::lround(s.t / config_.dt)] = std::move(v);
    }
  } else {
    test_points_ = default_test_grid(dom, config_.reference.test_counts);
  }

  record_ = RunRecord{};
  record_.components = problem_.is_navier_stokes() ? std::vector<std::string>{"u1", "u2", "p"}
                                                   : std::vector<std::string>{"u"};
  RunRow row;
  row.step = 0;
  row.t = 0.0;
  row.fit_residual = init.residual;
  row.r_current = r_current_;
  row.wall_ms = ms_since(start);
  row.solves = static_cast<int>(total_solves());
  record_row(std::move(row), config_.step_count() == 0);
  take_snapshots(0.0);
}

Matrix Solver::reference_at(double t) const {
  if (!reference_ || reference_->source == ReferenceSource::None)
    throw NotAvailableError("no reference for '" + problem_.name + "'");
  if (reference_->source == ReferenceSource::Exact) return exact_solution(problem_, test_points_, t);
  const long n = std::lround(t / reference_->dt);
  if (n < 0 || n >= static_cast<long>(reference_->by_step.size()) || reference_->by_step[n].size() == 0)
    throw NotAvailableError("no spectral reference stored at t=" + std::to_string(t));
  return reference_->by_step[n];
}

Matrix Solver::predict(const Matrix& points) const {
  if (&points == &test_points_) {
    if (!test_eval_) test_eval_ = std::make_unique<PointEvaluator>(*model_, test_points_, 0);
    return test_eval_->evaluate(coefficients()).u;
  }
  return PointEvaluator(*model_, points, 0).evaluate(coefficients()).u;
}

Matrix Solver::predict_pressure(const Matrix& points) const {
  if (!problem_.is_navier_stokes()) throw std::logic_error("predict_pressure: not a Navier-Stokes run");
  if (&points == &test_points_) {
    if (!test_eval_pressure_) test_eval_pressure_ = std::make_unique<PointEvaluator>(*pressure_model_, test_points_, 0);
    return test_eval_pressure_->evaluate(pressure_theta_).u;
  }
  return PointEvaluator(*pressure_model_, points, 0).evaluate(pressure_theta_).u;
}

double Solver::velocity_divergence_linf(const Matrix& points) const {
  if (!problem_.is_navier_stokes()) throw std::logic_error("velocity_divergence_linf: not a Navier-Stokes run");
  const FieldWithDerivs f = PointEvaluator(*model_, points, 1).evaluate(coefficients());
  return (f.du[0].col(0) + f.du[1].col(1)).cwiseAbs().maxCoeff();
}

void Solver::record_row(RunRow row, bool final_step) {
  const bool eval = row.step % config_.error_every == 0 || final_step;
  row.rel_l2 = kNaN;
  row.linf = kNaN;
  if (eval && reference_ && reference_->source != ReferenceSource::None) {
    const Matrix ref = reference_at(row.t);
    const Matrix u = predict(test_points_);
    if (problem_.is_navier_stokes()) {
      const Matrix vel_ref = ref.leftCols(2);
      const Matrix p = predict_pressure(test_points_);
      row.rel_l2 = safe_rel_l2(u, vel_ref);
      row.linf = linf(u, vel_ref);
      row.component_rel_l2 = {safe_rel_l2(u.col(0), vel_ref.col(0)), safe_rel_l2(u.col(1), vel_ref.col(1)),
                              safe_rel_l2(p, ref.col(2))};
    } else {
      row.rel_l2 = safe_rel_l2(u, ref);
      row.linf = linf(u, ref);
    }
    record_.final_rel_l2 = row.rel_l2;
    record_.final_linf = row.linf;
    record_.final_component_rel_l2 = row.component_rel_l2;
  }
  record_.total_ms += row.wall_ms;
  if (row.reinit) ++record_.reinit_count;
  record_.factorizations = factorizations_;
  record_.solves = total_solves();
  record_.rows.push_back(std::move(row));
}

void Solver::take_snapshots(double t_now) {
  for (double ts : config_.snapshot_times) {
    if (std::abs(ts - t_now) > 0.5 * config_.dt) continue;
    Snapshot s;
    s.t = t_now;
    s.points = test_points_;
    if (problem_.is_navier_stokes()) {
      const Matrix u = predict(test_points_);
      const Matrix p = predict_pressure(test_points_);
      s.values.resize(u.rows(), 3);
      s.values << u, p;
    } else {
      s.values = predict(test_points_);
    }
    record_.snapshots.push_back(std::move(s));
  }
}

void Solver::redraw(double r, Seed seed) {
  retired_solves_ += space_->solves();
  r_current_ = r;
  model_ = std::make_shared<const RnbModel>(draw_model(r, seed));
  space_ = make_space(model_);
  ++factorizations_;
  implicit_cache_.reset();
  test_eval_.reset();
}

Matrix Solver::solve_implicit(const SchemeId& scheme, double t_new, double& residual) {
  const double dt = config_.dt;
  if (!implicit_cache_) {
    FieldWithDerivs basis{space_->values(), space_->grad(), space_->second()};
    const Matrix op_rows = operator_at(basis, t_new, &points_.interior, nullptr);
    const Matrix design = implicit_design_rows(scheme, space_->values(), op_rows, dt, problem_.linear());
    implicit_system_ = assemble_design(design, space_->boundary_rows(), config_.lambda_bc, config_.lambda);
    implicit_cache_ = factorize(implicit_system_, fingerprint_of(*model_, points_.interior, points_.boundary,
                                                                 "implicit:" + scheme_name(scheme)));
    ++factorizations_;
  }
  const long n = points_.interior.rows();
  const Matrix affine = Matrix::Zero(n, problem_.out_dim);
  const Matrix rhs_int = implicit_rhs(scheme, history_, affine, dt);
  Matrix bdy;
  if (implicit_system_.boundary_rows > 0) bdy = space_->boundary_values(t_new, problem_.out_dim);
  const LsqSolution sol = solve(*implicit_cache_, stack_rhs(implicit_system_, rhs_int, bdy));
  ++retired_solves_;
  const double c0 = implicit_lhs(scheme)[0];
  const Matrix interior_res =
      implicit_system_.design.topRows(n) * sol.theta / implicit_system_.interior_scale - rhs_int;
  residual = interior_res.norm() / std::sqrt(static_cast<double>(n)) / c0;
  return sol.theta;
}

void Solver::step() {
  if (step_ < 0) throw std::logic_error("Solver::step before initialize");
  const Clock::time_point start = Clock::now();
  const long solves_before = total_solves();
  const long n = step_ + 1;
  const double dt = config_.dt;
  const double t_new = n * dt;

  const bool bootstrap = static_cast<int>(history_.size()) < scheme_steps(scheme_);
  const SchemeId scheme = bootstrap ? parse_scheme("rk4") : scheme_;
  const bool reinit =
      config_.reinit_every_step || (config_.adaptive && should_reinit(prev_residual_, *config_.adaptive));

  Matrix pgrad;
  if (problem_.is_navier_stokes()) pgrad = pressure_grad_interior();
  const Matrix* pgrad_ptr = problem_.is_navier_stokes() ? &pgrad : nullptr;
  const OperatorFn op = [&](const FieldWithDerivs& f, double t) {
    return operator_at(f, t, &points_.interior, pgrad_ptr);
  };

  auto adapted_r = [&](const FieldSampler& sampler) {
    if (!config_.adaptive) return r_current_;
    const auto spectra = analyze_axis_spectra(sampler, problem_.domain, config_.adaptive->grid_n);
    return adaptive_r(spectra, *config_.adaptive, model_->feature_map);
  };

  Matrix theta;
  double residual = 0.0;
  if (is_implicit(scheme)) {
    if (reinit) {
      const Matrix newest = history_.newest().coeffs;
      const auto old = model_;
      const double r = adapted_r([&](const Matrix& pts) { return PointEvaluator(*old, pts, 0).evaluate(newest).u; });
      redraw(r, config_.seed + static_cast<Seed>(n));
    }
    theta = solve_implicit(scheme, t_new, residual);
  } else {
    const TargetField target = build_target(scheme, history_, *space_, op, dt, n);
    const double peak = target.values.cwiseAbs().maxCoeff();
    if (peak > config_.divergence_threshold)
      throw DivergenceError(n, "target magnitude " + std::to_string(peak) + " exceeds the divergence threshold");
    if (reinit) {
      const int order = problem_.derivative_order();
      const double r = adapted_r([&](const Matrix& pts) {
        const OperatorFn op_pts = [&](const FieldWithDerivs& f, double t) {
          return operator_at(f, t, &pts, nullptr);
        };
        return evaluate_recipe(target.recipe, pts, order, op_pts);
      });
      redraw(r, config_.seed + static_cast<Seed>(n));
    }
    theta = space_->fit(target.values, t_new).theta;
    residual = interior_rms(*space_, theta, target.values);
  }
  if (!theta.allFinite()) throw DivergenceError(n, "non-finite coefficients");
  FieldWithDerivs field = space_->evaluate(theta);
  if (!field.u.allFinite() || field.u.cwiseAbs().maxCoeff() > config_.divergence_threshold)
    throw DivergenceError(n, "solution exceeds the divergence threshold");
  history_.push({std::move(theta), std::move(field), t_new, model_});
  if (problem_.is_navier_stokes()) solve_pressure(t_new);
  prev_residual_ = residual;
  step_ = n;

  RunRow row;
  row.step = n;
  row.t = t_new;
  row.fit_residual = residual;
  row.r_current = r_current_;
  row.reinit = reinit;
  row.wall_ms = ms_since(start);
  row.solves = static_cast<int>(total_solves() - solves_before);
  record_row(std::move(row), n == config_.step_count());
  take_snapshots(t_new);
}

RunRecord Solver::run() {
  initialize();
  const long steps = config_.step_count();
  for (long n = 0; n < steps; ++n) step();
  return record_;
}

// --- Navier-Stokes pressure -----------------------------------------------------

void Solver::build_pressure() {
  const NetworkConfig& net = config_.pressure_network;
  if (net.fourier == FourierMode::Custom) throw ConfigError("pressure_network.fourier", "not supported");
  std::vector<int> widths{problem_.domain.dim()};
  widths.insert(widths.end(), net.hidden.begin(), net.hidden.end());
  widths.push_back(1);
  std::optional<ScaleVector> scale;
  if (net.scale_n_max) scale = make_msrnb_scales(net.hidden.front(), *net.scale_n_max);
  pressure_model_ =
      std::make_shared<const RnbModel>(init_rnb(widths, net.r, std::nullopt, std::move(scale), config_.seed + 1000003));
  pressure_space_ = std::make_unique<CollocationSpace>(pressure_model_, points_.interior, points_.boundary,
                                                       BoundaryRowKind::Value, 2, config_.lambda_bc, config_.lambda,
                                                       nullptr, false);
  Matrix lap = pressure_space_->second()[0];
  for (std::size_t d = 1; d < pressure_space_->second().size(); ++d) lap += pressure_space_->second()[d];
  pressure_system_ = assemble_design(lap, pressure_space_->boundary_rows(), config_.lambda_bc, config_.lambda);
  pressure_cache_ = factorize(pressure_system_, fingerprint_of(*pressure_model_, points_.interior, points_.boundary,
                                                               "pressure-poisson"));
  ++factorizations_;
  test_eval_pressure_.reset();
}

void Solver::solve_pressure(double t) {
  const FieldWithDerivs& vel = history_.newest().field;
  const Vector f_div = ns_forcing_divergence(points_.interior, t, problem_.params.nu);
  const Matrix rhs_int = pressure_poisson_rhs(vel, f_div);
  Matrix bdy;
  if (pressure_system_.boundary_rows > 0) bdy = ns_exact_fields(points_.boundary, t).pressure;
  pressure_theta_ = solve(*pressure_cache_, stack_rhs(pressure_system_, rhs_int, bdy)).theta;
  ++retired_solves_;
}

Matrix Solver::pressure_grad_interior() const {
  Matrix g(points_.interior.rows(), 2);
  for (int d = 0; d < 2; ++d) g.col(d) = pressure_space_->grad()[d] * pressure_theta_;
  return g;
}

RunRecord run(const SolverConfig& config) {
  Solver s(config);
  return s.run();
}

RunRecord run_ns(const SolverConfig& config) {
  Solver s(config);
  if (!s.problem().is_navier_stokes()) throw ConfigError("problem", "run_ns needs the ns2d problem");
  return s.run();
}

}  // namespace sdtm
