#pragma once

// Fourier pseudospectral reference solver for 1D periodic problems with
// integrating-factor RK4 stepping and 2/3-rule dealiasing.

#include "sdtm/problems.hpp"
#include "sdtm/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sdtm {

struct SpectralSnapshot {
  double t = 0.0;
  Vector x;  // periodic grid, n points
  Vector u;
};

/// Supported operators: Zero, Advection, Heat, Burgers, AllenCahn on a 1D
/// periodic domain. Initial data comes from problem.initial. n must be a power
/// of two; every snapshot time must be a multiple of dt.
std::vector<SpectralSnapshot> spectral_solve(const PdeProblem& problem, int n, double dt, double T,
                                             const std::vector<double>& snapshot_times);

/// Trigonometric interpolation of periodic grid values to arbitrary points.
Vector spectral_interpolate(const Vector& u, double lo, double hi, const Vector& x);

/// File stem for a cached snapshot: <problem>_n<n>_dt<dt>_t<t>.
std::string reference_cache_stem(const PdeProblem& problem, int n, double dt, double t);

/// Writes <stem>.csv (header x,u) and <stem>.json (problem, n, dt, t, parameters).
void save_reference(const std::filesystem::path& dir, const PdeProblem& problem, int n, double dt,
                    const SpectralSnapshot& snap);

/// Reads a cached snapshot if the sidecar matches; returns false otherwise.
bool load_reference(const std::filesystem::path& dir, const PdeProblem& problem, int n, double dt, double t,
                    SpectralSnapshot& snap);

/// Cached lookup, solving and saving on a miss.
SpectralSnapshot reference_snapshot(const std::filesystem::path& dir, const PdeProblem& problem, int n, double dt,
                                    double t);

/// Several times at once; a single solve fills every missing entry.
std::vector<SpectralSnapshot> reference_snapshots(const std::filesystem::path& dir, const PdeProblem& problem, int n,
                                                  double dt, const std::vector<double>& times);

}  // namespace sdtm
