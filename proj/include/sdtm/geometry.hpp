#pragma once

#include "sdtm/types.hpp"

#include <span>
#include <vector>

namespace sdtm {

/// Axis-aligned box [lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}].
class Domain {
 public:
  Domain(std::vector<double> lo, std::vector<double> hi);

  int dim() const { return static_cast<int>(lo_.size()); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  double lo(int i) const { return lo_[i]; }
  double hi(int i) const { return hi_[i]; }
  double extent(int i) const { return hi_[i] - lo_[i]; }
  std::vector<double> center() const;

  bool contains_strictly(const Eigen::Ref<const RowVector>& p) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct CollocationSet {
  Matrix interior;  // N x dim
  Matrix boundary;  // N_b x dim
  Seed seed = 0;
};

/// Tensor-product grid with endpoints; row-major, last dimension fastest.
Matrix uniform_grid(const Domain& domain, std::span<const int> counts);

/// Latin hypercube sample: each axis has exactly one point per stratum.
Matrix lhs_sample(const Domain& domain, int n, Seed seed);

/// Points on the faces of the box, `n_per_face` per face.
///
/// Faces are emitted in the order (dim 0 lo, dim 0 hi, dim 1 lo, dim 1 hi, ...).
/// The lo and hi face of a dimension share their tangential coordinates, so row
/// j of a lo block and row j of the following hi block are periodic partners.
Matrix boundary_sample(const Domain& domain, int n_per_face, Seed seed);

/// Uniform periodic grid along one axis: n points lo + j*L/n, j < n.
Vector periodic_axis(double lo, double hi, int n);

}  // namespace sdtm
