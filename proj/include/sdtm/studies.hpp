#pragma once

// Parameter sweeps built on the solver: integrator convergence, network width,
// supervised fits over r, and frequency support of tanh(k sin x).

#include "sdtm/adaptive.hpp"
#include "sdtm/driver.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sdtm {

/// Runs job(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by a job is rethrown after all workers finish.
void parallel_for(long n, int threads, const std::function<void(long)>& job);

/// Least-squares slope of log(y) against log(x) over finite positive pairs;
/// empty with fewer than two such pairs.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceRow {
  std::string scheme;
  double dt = 0.0;
  double rel_l2 = 0.0;  // NaN when the run diverged
  bool diverged = false;
  double total_ms = 0.0;
};

struct ConvergenceSlope {
  std::string scheme;
  std::optional<double> slope;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSlope> slopes;
};

ConvergenceResult convergence_study(const SolverConfig& base, const std::vector<std::string>& schemes,
                                    const std::vector<double>& dts, int threads = 1);

struct WidthRow {
  int width = 0;
  double rel_l2 = 0.0;
  bool diverged = false;
  double total_ms = 0.0;
};

/// Replaces the first hidden width of base.network. Nonpositive widths raise ConfigError.
std::vector<WidthRow> width_sweep(const SolverConfig& base, const std::vector<int>& widths, int threads = 1);

struct FitStudyConfig {
  std::vector<std::string> targets{"sin"};  // "sin" = sin(pi x), "burgers@<t>" = Burgers snapshot
  std::vector<double> r_values{1.0};
  int width = 1000;
  int seeds = 10;
  Seed seed = 0;
  int points = 1001;                        // periodic training grid on [-1, 1)
  IntMatrix multipliers;                    // Fourier multipliers, default [[1]]
  double lambda = 1e-20;
  std::filesystem::path reference_cache;    // empty: no caching
  int spectral_n = 4096;
  double spectral_dt = 1e-4;
};

struct FitRow {
  std::string target;
  double r = 0.0;
  std::vector<double> mse;  // one per seed
  double mean = 0.0;
  double stddev = 0.0;      // population standard deviation over seeds
};

/// Target as a function of points on [-1, 1). Burgers snapshots are computed
/// (or read from the cache) once, then interpolated spectrally.
std::function<Matrix(const Matrix&)> make_fit_target(const FitStudyConfig& config, const std::string& target);

/// Mean squared error at x_test of a least-squares fit to (x_train, y_train).
double fit_mse(const FitStudyConfig& config, const Matrix& x_train, const Matrix& y_train, const Matrix& x_test,
               const Matrix& y_test, double r, Seed seed);

std::vector<FitRow> fit_study(const FitStudyConfig& config, int threads = 1);

struct SupportRow {
  double k = 0.0;
  int support = 0;
  double ratio = 0.0;  // S_k / k, NaN for k = 0
};

std::vector<SupportRow> support_study(const std::vector<double>& ks, double epsilon, int grid_n = 4096);

}  // namespace sdtm
