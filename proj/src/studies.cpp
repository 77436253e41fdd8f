#include "sdtm/studies.hpp"

#include "sdtm/lsq.hpp"
#include "sdtm/spectral_ref.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace sdtm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Only the final error is reported, so intermediate error evaluations are skipped.
SolverConfig final_error_only(SolverConfig c) {
  c.error_every = static_cast<int>(std::max<long>(1, c.step_count()));
  c.snapshot_times.clear();
  return c;
}

}  // namespace

void parallel_for(long n, int threads, const std::function<void(long)>& job) {
  const long workers = std::max<long>(1, std::min<long>(threads, n));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (long i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0)) return std::nullopt;
  return sxy / sxx;
}

ConvergenceResult convergence_study(const SolverConfig& base, const std::vector<std::string>& schemes,
                                    const std::vector<double>& dts, int threads) {
  if (schemes.empty()) throw ConfigError("schemes", "empty list");
  if (dts.empty()) throw ConfigError("dts", "empty list");
  std::vector<SolverConfig> configs;
  ConvergenceResult out;
  for (const auto& s : schemes) {
    for (double dt : dts) {
      SolverConfig c = base;
      c.scheme = s;
      c.dt = dt;
      c.validate();
      configs.push_back(final_error_only(c));
      out.rows.push_back({s, dt, kNaN, false, 0.0});
    }
  }
  parallel_for(static_cast<long>(configs.size()), threads, [&](long i) {
    try {
      const RunRecord rec = run(configs[i]);
      out.rows[i].rel_l2 = rec.final_rel_l2;
      out.rows[i].total_ms = rec.total_ms;
    } catch (const DivergenceError&) {
      out.rows[i].diverged = true;
    }
  });
  for (const auto& s : schemes) {
    std::vector<double> x, y;
    for (const auto& r : out.rows) {
      if (r.scheme != s || r.diverged) continue;
      x.push_back(r.dt);
      y.push_back(r.rel_l2);
    }
    out.slopes.push_back({s, loglog_slope(x, y)});
  }
  return out;
}

std::vector<WidthRow> width_sweep(const SolverConfig& base, const std::vector<int>& widths, int threads) {
  if (widths.empty()) throw ConfigError("widths", "empty list");
  std::vector<SolverConfig> configs;
  std::vector<WidthRow> rows;
  for (int w : widths) {
    if (w <= 0) throw ConfigError("widths", "width must be positive, got " + std::to_string(w));
    SolverConfig c = base;
    if (c.network.hidden.empty()) c.network.hidden.push_back(w);
    c.network.hidden.front() = w;
    c.validate();
    configs.push_back(final_error_only(c));
    rows.push_back({w, kNaN, false, 0.0});
  }
  parallel_for(static_cast<long>(configs.size()), threads, [&](long i) {
    try {
      const RunRecord rec = run(configs[i]);
      rows[i].rel_l2 = rec.final_rel_l2;
      rows[i].total_ms = rec.total_ms;
    } catch (const DivergenceError&) {
      rows[i].diverged = true;
    }
  });
  return rows;
}

std::function<Matrix(const Matrix&)> make_fit_target(const FitStudyConfig& config, const std::string& target) {
  if (target == "sin") {
    return [](const Matrix& x) -> Matrix { return x.col(0).array().unaryExpr([](double v) { return std::sin(M_PI * v); }); };
  }
  const std::string prefix = "burgers@";
  if (target.rfind(prefix, 0) == 0) {
    double t = 0.0;
    try {
      t = std::stod(target.substr(prefix.size()));
    } catch (const std::exception&) {
      throw ConfigError("targets", "bad snapshot time in '" + target + "'");
    }
    if (t < 0) throw ConfigError("targets", "snapshot time must be >= 0");
    const PdeProblem p = make_problem("burgers1d");
    SpectralSnapshot snap;
    if (config.reference_cache.empty()) {
      snap = spectral_solve(p, config.spectral_n, config.spectral_dt, t, {t}).front();
    } else {
      snap = reference_snapshot(config.reference_cache, p, config.spectral_n, config.spectral_dt, t);
    }
    const double lo = p.domain.lo(0), hi = p.domain.hi(0);
    return [u = snap.u, lo, hi](const Matrix& x) -> Matrix {
      return spectral_interpolate(u, lo, hi, x.col(0));
    };
  }
  throw ConfigError("targets", "unknown target '" + target + "' (expected sin or burgers@<t>)");
}

double fit_mse(const FitStudyConfig& config, const Matrix& x_train, const Matrix& y_train, const Matrix& x_test,
               const Matrix& y_test, double r, Seed seed) {
  const PdeProblem p = make_problem("burgers1d");  // periodic [-1, 1]
  NetworkConfig net;
  net.hidden = {config.width};
  net.r = r;
  net.fourier = FourierMode::Custom;
  net.multipliers = config.multipliers.size() ? config.multipliers : IntMatrix::Ones(1, 1);
  const RnbModel model = draw_network(net, p, 1, r, seed);
  const LsqSystem sys = assemble_design(evaluate_basis(model, x_train, 0), nullptr, BoundaryRowKind::None, 0.0,
                                        config.lambda);
  const Matrix theta = solve_coefficients(factorize(sys), stack_rhs(sys, y_train, Matrix()));
  const Matrix pred = predict_with(evaluate_basis(model, x_test, 0), theta);
  return (pred - y_test).squaredNorm() / static_cast<double>(y_test.size());
}

std::vector<FitRow> fit_study(const FitStudyConfig& config, int threads) {
  if (config.width <= 0) throw ConfigError("width", "must be positive");
  if (config.seeds <= 0) throw ConfigError("seeds", "must be positive");
  if (config.points < 2) throw ConfigError("points", "need at least two points");
  if (config.r_values.empty()) throw ConfigError("r", "empty list");
  for (double r : config.r_values)
    if (!(r > 0)) throw ConfigError("r", "values must be positive");

  Matrix x_train = periodic_axis(-1.0, 1.0, config.points);
  const double h = 2.0 / config.points;
  Matrix x_test = (x_train.array() + 0.5 * h).matrix();

  struct Job {
    size_t row;
    int seed;
  };
  std::vector<FitRow> rows;
  std::vector<std::pair<Matrix, Matrix>> data;
  std::vector<size_t> target_of_row;
  std::vector<Job> jobs;
  for (size_t ti = 0; ti < config.targets.size(); ++ti) {
    const auto f = make_fit_target(config, config.targets[ti]);
    data.emplace_back(f(x_train), f(x_test));
    for (double r : config.r_values) {
      rows.push_back({config.targets[ti], r, std::vector<double>(config.seeds, kNaN), kNaN, kNaN});
      target_of_row.push_back(ti);
      for (int s = 0; s < config.seeds; ++s) jobs.push_back({rows.size() - 1, s});
    }
  }
  parallel_for(static_cast<long>(jobs.size()), threads, [&](long i) {
    const Job& j = jobs[i];
    FitRow& row = rows[j.row];
    const auto& [y_train, y_test] = data[target_of_row[j.row]];
    row.mse[j.seed] = fit_mse(config, x_train, y_train, x_test, y_test, row.r, config.seed + static_cast<Seed>(j.seed));
  });
  for (FitRow& row : rows) {
    const double n = static_cast<double>(row.mse.size());
    row.mean = std::accumulate(row.mse.begin(), row.mse.end(), 0.0) / n;
    double var = 0.0;
    for (double v : row.mse) var += (v - row.mean) * (v - row.mean);
    row.stddev = std::sqrt(var / n);
  }
  return rows;
}

std::vector<SupportRow> support_study(const std::vector<double>& ks, double epsilon, int grid_n) {
  if (!(epsilon > 0)) throw ConfigError("epsilon", "must be positive");
  std::vector<SupportRow> rows;
  for (double k : ks) {
    if (k < 0) throw ConfigError("k", "must be >= 0");
    const int s = frequency_support(k, epsilon, grid_n);
    rows.push_back({k, s, k > 0 ? s / k : kNaN});
  }
  return rows;
}

}  // namespace sdtm
