#include "sdtm/basis.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

namespace sdtm {

int FourierFeatureMap::max_multiplier() const { return multipliers.size() == 0 ? 1 : multipliers.maxCoeff(); }

Matrix FourierFeatureMap::frequencies() const {
  Matrix omega(pairs(), input_dim());
  for (int j = 0; j < pairs(); ++j)
    for (int i = 0; i < input_dim(); ++i)
      omega(j, i) = multipliers(j, i) * 2.0 * std::numbers::pi / period[i];
  return omega;
}

void FourierFeatureMap::validate() const {
  if (multipliers.rows() == 0 || multipliers.cols() == 0)
    throw std::invalid_argument("feature map: B must be non-empty");
  if (static_cast<int>(period.size()) != input_dim())
    throw std::invalid_argument("feature map: one period per input dim required");
  for (double L : period)
    if (!(L > 0)) throw std::invalid_argument("feature map: periods must be positive");
  // Rows may have zero entries along some axes (axis-aligned features) but not be all zero.
  for (int j = 0; j < pairs(); ++j) {
    if ((multipliers.row(j).array() < 0).any())
      throw std::invalid_argument("feature map: multipliers must be non-negative integers");
    if ((multipliers.row(j).array() == 0).all())
      throw std::invalid_argument("feature map: a row of B is entirely zero");
  }
}

Matrix RnbModel::stacked_coeffs() const {
  Matrix theta(basis_count() + 1, out_dim());
  theta.topRows(basis_count()) = out_coeffs;
  theta.bottomRows(1) = out_bias;
  return theta;
}

void RnbModel::set_stacked_coeffs(const Matrix& theta) {
  if (theta.rows() != basis_count() + 1) throw std::invalid_argument("set_stacked_coeffs: row count must be M+1");
  out_coeffs = theta.topRows(basis_count());
  out_bias = theta.bottomRows(1);
}

RnbModel init_rnb(std::span<const int> widths, double r, std::optional<FourierFeatureMap> feature_map,
                  std::optional<ScaleVector> scale, Seed seed) {
  if (!(r > 0)) throw std::invalid_argument("init_rnb: r must be positive");
  if (widths.size() < 3) throw std::invalid_argument("init_rnb: need input, hidden and output widths");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("init_rnb: widths must be positive");

  RnbModel model;
  model.input_dim = widths[0];
  std::size_t first_hidden = 1;
  int fan_in = widths[0];
  if (feature_map) {
    feature_map->validate();
    if (feature_map->input_dim() != widths[0])
      throw std::invalid_argument("init_rnb: feature map input dim does not match widths[0]");
    if (widths.size() < 4 || widths[1] != feature_map->output_dim())
      throw std::invalid_argument("init_rnb: widths[1] must equal 2 * rows(B) with a feature map");
    first_hidden = 2;
    fan_in = widths[1];
  }
  const std::size_t n_hidden = widths.size() - 1 - first_hidden;
  if (n_hidden < 1 || n_hidden > 3) throw std::invalid_argument("init_rnb: 1 to 3 hidden layers supported");
  if (scale) {
    if (static_cast<int>(scale->scales.size()) != widths[first_hidden])
      throw std::invalid_argument("init_rnb: scale vector length must equal the first hidden width");
    for (int k : scale->scales)
      if (k < 1) throw std::invalid_argument("init_rnb: scales must be >= 1");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-r, r);
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const int out = widths[first_hidden + l];
    HiddenLayer layer{Matrix(out, fan_in), Vector(out)};
    for (int a = 0; a < out; ++a)
      for (int b = 0; b < fan_in; ++b) layer.weight(a, b) = unif(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int a = 0; a < out; ++a) layer.bias(a) = normal(rng);
    model.hidden.layers.push_back(std::move(layer));
    fan_in = out;
  }
  model.hidden.init_coefficient = r;
  model.hidden.seed = seed;
  model.feature_map = std::move(feature_map);
  model.scale = std::move(scale);
  const int out_dim = widths.back();
  model.out_coeffs = Matrix::Zero(model.basis_count(), out_dim);
  model.out_bias = RowVector::Zero(out_dim);
  return model;
}

ScaleVector make_msrnb_scales(int width, int n_max) {
  if (width < 1 || n_max < 1) throw std::invalid_argument("make_msrnb_scales: width and n_max must be positive");
  if (n_max > width) throw std::invalid_argument("make_msrnb_scales: n_max exceeds width");
  const int seg = width / n_max;
  ScaleVector k;
  k.scales.resize(width);
  for (int i = 0; i < width; ++i) k.scales[i] = std::min(i / seg, n_max - 1) + 1;
  return k;
}

namespace {

struct Activation {
  Matrix a;
  std::vector<Matrix> da;
  std::vector<Matrix> dda;
};

// Effective first-layer weight with per-neuron scales folded in.
Matrix effective_weight(const RnbModel& model, std::size_t layer) {
  const Matrix& w = model.hidden.layers[layer].weight;
  if (layer != 0 || !model.scale) return w;
  Vector k(w.rows());
  for (int i = 0; i < k.size(); ++i) k(i) = model.scale->scales[i];
  return k.asDiagonal() * w;
}

void apply_tanh_layer(Activation& act, const Matrix& w, const Vector& b, int order, bool raw_input) {
  const int dim = static_cast<int>(order >= 1 ? act.da.size() : 0);
  Matrix z = act.a * w.transpose();
  z.rowwise() += b.transpose();
  Matrix t = z.array().tanh().matrix();
  Matrix s = (1.0 - t.array().square()).matrix();

  std::vector<Matrix> dz(dim);
  for (int i = 0; i < dim; ++i) {
    if (raw_input) {
      // d(x)/dx_i is the unit vector e_i, so dz_i is column i of W broadcast over rows.
      dz[i] = Matrix::Ones(z.rows(), 1) * w.col(i).transpose();
    } else {
      dz[i] = act.da[i] * w.transpose();
    }
  }
  if (order >= 2) {
    for (int i = 0; i < dim; ++i) {
      Matrix ddz = raw_input ? Matrix::Zero(z.rows(), z.cols()) : Matrix(act.dda[i] * w.transpose());
      act.dda[i] = (s.array() * ddz.array() - 2.0 * t.array() * s.array() * dz[i].array().square()).matrix();
    }
  }
  for (int i = 0; i < dim; ++i) act.da[i] = (s.array() * dz[i].array()).matrix();
  act.a = std::move(t);
}

}  // namespace

BasisEvaluation evaluate_basis(const RnbModel& model, const Matrix& points, int order) {
  if (order < 0 || order > 2) throw UnsupportedError("evaluate_basis: derivative order > 2 is not supported");
  if (points.cols() != model.input_dim) throw std::invalid_argument("evaluate_basis: point dim mismatch");
  const int dim = model.input_dim;
  const long n = points.rows();

  Activation act;
  bool raw_input = true;
  if (order >= 1) act.da.resize(dim);
  if (order >= 2) act.dda.resize(dim);

  if (model.feature_map) {
    raw_input = false;
    const Matrix omega = model.feature_map->frequencies();
    const int p = model.feature_map->pairs();
    const Matrix arg = points * omega.transpose();
    const Matrix sn = arg.array().sin().matrix();
    const Matrix cs = arg.array().cos().matrix();
    act.a.resize(n, 2 * p);
    act.a << sn, cs;
    for (int i = 0; i < dim && order >= 1; ++i) {
      const Vector wi = omega.col(i);
      act.da[i].resize(n, 2 * p);
      act.da[i] << cs * wi.asDiagonal(), -sn * wi.asDiagonal();
      if (order >= 2) {
        const Vector wi2 = wi.array().square();
        act.dda[i].resize(n, 2 * p);
        act.dda[i] << -sn * wi2.asDiagonal(), -cs * wi2.asDiagonal();
      }
    }
  } else {
    act.a = points;
  }

  for (std::size_t l = 0; l < model.hidden.layers.size(); ++l) {
    apply_tanh_layer(act, effective_weight(model, l), model.hidden.layers[l].bias, order, raw_input && l == 0);
  }

  BasisEvaluation eval;
  eval.order = order;
  eval.values = std::move(act.a);
  if (order >= 1) eval.grad = std::move(act.da);
  if (order >= 2) eval.lap_terms = std::move(act.dda);
  return eval;
}

Matrix predict_with(const BasisEvaluation& eval, const Matrix& theta) {
  if (theta.rows() != eval.basis_count() + 1) throw std::invalid_argument("predict: coefficient rows must be M+1");
  Matrix out = eval.values * theta.topRows(eval.basis_count());
  out.rowwise() += theta.bottomRows(1).row(0);
  return out;
}

Matrix predict(const RnbModel& model, const BasisEvaluation& eval) {
  if (eval.basis_count() != model.basis_count()) throw std::invalid_argument("predict: basis count mismatch");
  Matrix out = eval.values * model.out_coeffs;
  out.rowwise() += model.out_bias;
  return out;
}

bool same_hidden_parameters(const RnbModel& a, const RnbModel& b) {
  if (a.hidden.layers.size() != b.hidden.layers.size()) return false;
  for (std::size_t l = 0; l < a.hidden.layers.size(); ++l) {
    const auto& la = a.hidden.layers[l];
    const auto& lb = b.hidden.layers[l];
    if (la.weight.rows() != lb.weight.rows() || la.weight.cols() != lb.weight.cols()) return false;
    if (std::memcmp(la.weight.data(), lb.weight.data(), sizeof(double) * la.weight.size()) != 0) return false;
    if (std::memcmp(la.bias.data(), lb.bias.data(), sizeof(double) * la.bias.size()) != 0) return false;
  }
  return true;
}

// --- serialization ----------------------------------------------------------

namespace {

constexpr const char* kMagic = "sdtm-rnb";
constexpr int kVersion = 1;

void put(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  out << buf;
}

template <class M>
void put_matrix(std::ostream& out, const M& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      put(out, m(i, j));
    }
    out << '\n';
  }
}

std::string token(std::istream& in) {
  std::string t;
  if (!(in >> t)) throw std::runtime_error("load_model: unexpected end of input");
  return t;
}

void expect(std::istream& in, const std::string& word) {
  if (token(in) != word) throw std::runtime_error("load_model: expected '" + word + "'");
}

double get_double(std::istream& in) {
  const std::string t = token(in);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0') throw std::runtime_error("load_model: bad number '" + t + "'");
  return v;
}

long get_long(std::istream& in) { return std::stol(token(in)); }

Matrix get_matrix(std::istream& in) {
  const long r = get_long(in), c = get_long(in);
  Matrix m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = get_double(in);
  return m;
}

}  // namespace

void save_model(const RnbModel& model, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "input_dim " << model.input_dim << '\n';
  if (model.feature_map) {
    const auto& fm = *model.feature_map;
    out << "feature_map " << fm.pairs() << ' ' << fm.input_dim() << '\n';
    for (int j = 0; j < fm.pairs(); ++j) {
      for (int i = 0; i < fm.input_dim(); ++i) out << (i ? " " : "") << fm.multipliers(j, i);
      out << '\n';
    }
    out << "period";
    for (double L : fm.period) {
      out << ' ';
      put(out, L);
    }
    out << '\n';
  } else {
    out << "feature_map none\n";
  }
  if (model.scale) {
    out << "scale " << model.scale->scales.size();
    for (int k : model.scale->scales) out << ' ' << k;
    out << '\n';
  } else {
    out << "scale none\n";
  }
  out << "init_coefficient ";
  put(out, model.hidden.init_coefficient);
  out << "\nseed " << model.hidden.seed << '\n';
  out << "layers " << model.hidden.layers.size() << '\n';
  for (const auto& layer : model.hidden.layers) {
    out << "weight ";
    put_matrix(out, layer.weight);
    out << "bias ";
    put_matrix(out, layer.bias);
  }
  out << "out_coeffs ";
  put_matrix(out, model.out_coeffs);
  out << "out_bias ";
  put_matrix(out, model.out_bias);
  out << "end\n";
}

RnbModel load_model(std::istream& in) {
  expect(in, kMagic);
  if (get_long(in) != kVersion) throw std::runtime_error("load_model: unsupported version");
  RnbModel m;
  expect(in, "input_dim");
  m.input_dim = static_cast<int>(get_long(in));
  expect(in, "feature_map");
  const std::string fm = token(in);
  if (fm != "none") {
    const long pairs = std::stol(fm), dims = get_long(in);
    FourierFeatureMap map;
    map.multipliers.resize(pairs, dims);
    for (long j = 0; j < pairs; ++j)
      for (long i = 0; i < dims; ++i) map.multipliers(j, i) = static_cast<int>(get_long(in));
    expect(in, "period");
    for (long i = 0; i < dims; ++i) map.period.push_back(get_double(in));
    m.feature_map = std::move(map);
  }
  expect(in, "scale");
  const std::string sc = token(in);
  if (sc != "none") {
    ScaleVector k;
    k.scales.resize(std::stoul(sc));
    for (auto& v : k.scales) v = static_cast<int>(get_long(in));
    m.scale = std::move(k);
  }
  expect(in, "init_coefficient");
  m.hidden.init_coefficient = get_double(in);
  expect(in, "seed");
  m.hidden.seed = std::stoull(token(in));
  expect(in, "layers");
  const long n_layers = get_long(in);
  for (long l = 0; l < n_layers; ++l) {
    HiddenLayer layer;
    expect(in, "weight");
    layer.weight = get_matrix(in);
    expect(in, "bias");
    layer.bias = get_matrix(in);
    m.hidden.layers.push_back(std::move(layer));
  }
  expect(in, "out_coeffs");
  m.out_coeffs = get_matrix(in);
  expect(in, "out_bias");
  m.out_bias = get_matrix(in);
  expect(in, "end");
  return m;
}

}  // namespace sdtm
