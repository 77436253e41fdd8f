#pragma once

// Spectrum of target fields and the adaptive choice of the initialization
// coefficient r.

#include "sdtm/basis.hpp"
#include "sdtm/geometry.hpp"
#include "sdtm/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace sdtm {

/// Two-sided DFT magnitudes of a field sampled on a uniform periodic grid.
///
/// indices[j] is the signed frequency index (a multiple of 2pi/L) of row j;
/// magnitudes has one column per field component, normalized by grid_n.
struct SpectrumAnalysis {
  int grid_n = 0;
  int axis = 0;
  std::vector<int> indices;
  Matrix magnitudes;
  RowVector mean_square;  // per component, of the sampled values

  /// Largest |index| whose magnitude (any component) is >= threshold; -1 if none.
  int max_index_at_least(double threshold) const;
};

struct AdaptivePolicy {
  double epsilon = 1e-4;
  double r_max = 100.0;
  int grid_n = 1024;

  void validate() const;
};

using FieldSampler = std::function<Matrix(const Matrix& points)>;

/// Spectrum of already periodic samples (rows = grid points, cols = components).
SpectrumAnalysis spectrum_of_samples(const Matrix& samples);

/// Samples the field on grid_n periodic points along `axis` through the domain
/// centre (the whole domain in 1D) and transforms. grid_n must be a power of two.
SpectrumAnalysis analyze_spectrum(const FieldSampler& field, const Domain& domain, int grid_n, int axis = 0);

/// One spectrum per axis.
std::vector<SpectrumAnalysis> analyze_axis_spectra(const FieldSampler& field, const Domain& domain, int grid_n);

/// r = min(max qualifying index, r_max) / max(B); 1 when no nonzero index qualifies.
double adaptive_r(const SpectrumAnalysis& spectrum, const AdaptivePolicy& policy,
                  const std::optional<FourierFeatureMap>& feature_map = std::nullopt);
double adaptive_r(const std::vector<SpectrumAnalysis>& spectra, const AdaptivePolicy& policy,
                  const std::optional<FourierFeatureMap>& feature_map = std::nullopt);

bool should_reinit(double prev_fit_residual, const AdaptivePolicy& policy);

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// S_k for tanh(k sin x) on [0, 2pi): largest |j| with magnitude > epsilon,
/// computed at grid_n points without a resolution check.
int frequency_support_at(double k, double epsilon, int grid_n);

/// Same, but recomputed at 2 * grid_n; throws ResolutionError if they differ.
int frequency_support(double k, double epsilon, int grid_n = 4096);

}  // namespace sdtm
