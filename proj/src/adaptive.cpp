#include "sdtm/adaptive.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace sdtm {

namespace {
bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }
}  // namespace

int SpectrumAnalysis::max_index_at_least(double threshold) const {
  int best = -1;
  for (std::size_t j = 0; j < indices.size(); ++j)
    if (magnitudes.row(static_cast<long>(j)).maxCoeff() >= threshold) best = std::max(best, std::abs(indices[j]));
  return best;
}

void AdaptivePolicy::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("adaptive policy: epsilon must be positive");
  if (!(r_max > 0)) throw std::invalid_argument("adaptive policy: r_max must be positive");
  if (!power_of_two(grid_n)) throw std::invalid_argument("adaptive policy: grid_n must be a power of two");
}

SpectrumAnalysis spectrum_of_samples(const Matrix& samples) {
  const int n = static_cast<int>(samples.rows());
  if (n < 2) throw std::invalid_argument("spectrum: need at least two samples");
  if (!samples.allFinite()) throw std::invalid_argument("spectrum: non-finite samples");
  SpectrumAnalysis s;
  s.grid_n = n;
  s.indices.resize(n);
  for (int j = 0; j < n; ++j) s.indices[j] = j <= n / 2 ? j : j - n;  // FFT order
  s.magnitudes.resize(n, samples.cols());
  s.mean_square = samples.array().square().colwise().mean();

  detail::RealFft fft(n);
  std::vector<std::complex<double>> spec(fft.modes());
  Vector col(n);
  for (long c = 0; c < samples.cols(); ++c) {
    col = samples.col(c);
    fft.forward(col.data(), spec.data());
    for (int j = 0; j < n; ++j) {
      const int m = j <= n / 2 ? j : n - j;
      s.magnitudes(j, c) = std::abs(spec[m]) / n;
    }
  }
  return s;
}

SpectrumAnalysis analyze_spectrum(const FieldSampler& field, const Domain& domain, int grid_n, int axis) {
  if (!power_of_two(grid_n)) throw std::invalid_argument("analyze_spectrum: grid_n must be a power of two");
  if (axis < 0 || axis >= domain.dim()) throw std::invalid_argument("analyze_spectrum: axis out of range");
  const Vector line = periodic_axis(domain.lo(axis), domain.hi(axis), grid_n);
  const auto centre = domain.center();
  Matrix pts(grid_n, domain.dim());
  for (int d = 0; d < domain.dim(); ++d) pts.col(d).setConstant(centre[d]);
  pts.col(axis) = line;
  SpectrumAnalysis s = spectrum_of_samples(field(pts));
  s.axis = axis;
  return s;
}

std::vector<SpectrumAnalysis> analyze_axis_spectra(const FieldSampler& field, const Domain& domain, int grid_n) {
  std::vector<SpectrumAnalysis> out;
  for (int a = 0; a < domain.dim(); ++a) out.push_back(analyze_spectrum(field, domain, grid_n, a));
  return out;
}

double adaptive_r(const std::vector<SpectrumAnalysis>& spectra, const AdaptivePolicy& policy,
                  const std::optional<FourierFeatureMap>& feature_map) {
  if (spectra.empty()) throw std::invalid_argument("adaptive_r: no spectrum");
  int top = -1;
  for (const auto& s : spectra) {
    if (s.indices.empty()) throw std::invalid_argument("adaptive_r: empty spectrum");
    top = std::max(top, s.max_index_at_least(policy.epsilon));
  }
  if (top <= 0) return 1.0;
  double r = std::min(static_cast<double>(top), policy.r_max);
  if (feature_map) r /= std::max(1, feature_map->max_multiplier());
  return r;
}

double adaptive_r(const SpectrumAnalysis& spectrum, const AdaptivePolicy& policy,
                  const std::optional<FourierFeatureMap>& feature_map) {
  return adaptive_r(std::vector<SpectrumAnalysis>{spectrum}, policy, feature_map);
}

bool should_reinit(double prev_fit_residual, const AdaptivePolicy& policy) {
  if (!(prev_fit_residual >= 0)) throw std::invalid_argument("should_reinit: residual must be non-negative");
  return prev_fit_residual > policy.epsilon;
}

int frequency_support_at(double k, double epsilon, int grid_n) {
  const Vector x = periodic_axis(0.0, 2.0 * M_PI, grid_n);
  Matrix f(grid_n, 1);
  for (int i = 0; i < grid_n; ++i) f(i, 0) = std::tanh(k * std::sin(x[i]));
  const SpectrumAnalysis s = spectrum_of_samples(f);
  int best = 0;
  for (int j = 0; j < grid_n; ++j)
    if (s.magnitudes(j, 0) > epsilon) best = std::max(best, std::abs(s.indices[j]));
  return best;
}

int frequency_support(double k, double epsilon, int grid_n) {
  if (!power_of_two(grid_n)) throw std::invalid_argument("frequency_support: grid_n must be a power of two");
  const int a = frequency_support_at(k, epsilon, grid_n);
  const int b = frequency_support_at(k, epsilon, 2 * grid_n);
  if (a != b)
    throw ResolutionError("frequency support unresolved at k=" + std::to_string(k) + ": " + std::to_string(a) +
                          " vs " + std::to_string(b) + " after grid doubling");
  return a;
}

}  // namespace sdtm
