#pragma once

// Random neural basis: a tanh network whose hidden layers are drawn once and
// frozen. Only the output layer is ever solved for, so every fit is a linear
// least-squares problem and all spatial derivatives have closed forms.

#include "sdtm/types.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace sdtm {

/// Periodic input layer [sin(Omega x); cos(Omega x)], Omega = B * 2pi/L.
///
/// `multipliers` stores the integer multiples B (rows = sin/cos pairs,
/// cols = input dims); the 2pi/L factor is applied from `period`.
struct FourierFeatureMap {
  IntMatrix multipliers;
  std::vector<double> period;

  int pairs() const { return static_cast<int>(multipliers.rows()); }
  int input_dim() const { return static_cast<int>(multipliers.cols()); }
  int output_dim() const { return 2 * pairs(); }
  int max_multiplier() const;
  Matrix frequencies() const;  // pairs x input_dim, real angular frequencies
  void validate() const;
};

/// Integer per-neuron scales of the first hidden layer (multi-scale basis).
struct ScaleVector {
  std::vector<int> scales;
};

struct HiddenLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

struct HiddenStack {
  std::vector<HiddenLayer> layers;
  double init_coefficient = 1.0;
  Seed seed = 0;
};

struct RnbModel {
  int input_dim = 1;
  std::optional<FourierFeatureMap> feature_map;
  std::optional<ScaleVector> scale;
  HiddenStack hidden;
  Matrix out_coeffs;   // M x d
  RowVector out_bias;  // d

  int basis_count() const { return static_cast<int>(hidden.layers.back().weight.rows()); }
  int out_dim() const { return static_cast<int>(out_coeffs.cols()); }

  /// Output layer as one (M+1) x d block, bias last.
  Matrix stacked_coeffs() const;
  void set_stacked_coeffs(const Matrix& theta);
};

/// Basis values and pure spatial derivatives at a point set.
struct BasisEvaluation {
  int order = 0;
  Matrix values;                 // N x M
  std::vector<Matrix> grad;      // per dim, N x M (order >= 1)
  std::vector<Matrix> lap_terms; // per dim, N x M (order == 2)

  long points() const { return values.rows(); }
  int basis_count() const { return static_cast<int>(values.cols()); }
};

/// Draws a model. `widths` follows the usual layer list: input dim, the
/// feature width (2 * pairs) when a feature map is given, hidden widths, and
/// the output dim. Hidden weights ~ U[-r, r], hidden biases ~ N(0, 1), output
/// layer zero.
RnbModel init_rnb(std::span<const int> widths, double r, std::optional<FourierFeatureMap> feature_map,
                  std::optional<ScaleVector> scale, Seed seed);

/// Splits `width` into n_max consecutive segments valued 1..n_max; the last
/// segment absorbs any remainder.
ScaleVector make_msrnb_scales(int width, int n_max);

BasisEvaluation evaluate_basis(const RnbModel& model, const Matrix& points, int order);

/// Output-layer prediction: values * W + b.
Matrix predict(const RnbModel& model, const BasisEvaluation& eval);

/// Same as predict, but with an explicit stacked (M+1) x d coefficient block.
Matrix predict_with(const BasisEvaluation& eval, const Matrix& theta);

/// Text dump of every field, hex floats, version tagged; load(save(m)) == m bitwise.
void save_model(const RnbModel& model, std::ostream& out);
RnbModel load_model(std::istream& in);

bool same_hidden_parameters(const RnbModel& a, const RnbModel& b);

}  // namespace sdtm
