#include "sdtm/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace sdtm {

Domain::Domain(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty()) throw std::invalid_argument("domain: dim must be positive");
  if (lo_.size() != hi_.size()) throw std::invalid_argument("domain: lo/hi length mismatch");
  for (std::size_t i = 0; i < lo_.size(); ++i)
    if (!(lo_[i] < hi_[i])) throw std::invalid_argument("domain: lo must be < hi in every dimension");
}

std::vector<double> Domain::center() const {
  std::vector<double> c(lo_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lo_[i] + hi_[i]);
  return c;
}

bool Domain::contains_strictly(const Eigen::Ref<const RowVector>& p) const {
  for (int i = 0; i < dim(); ++i)
    if (!(p(i) > lo_[i] && p(i) < hi_[i])) return false;
  return true;
}

Matrix uniform_grid(const Domain& domain, std::span<const int> counts) {
  if (static_cast<int>(counts.size()) != domain.dim())
    throw std::invalid_argument("uniform_grid: counts length must equal domain dim");
  long total = 1;
  for (int c : counts) {
    if (c < 2) throw std::invalid_argument("uniform_grid: every count must be >= 2");
    total *= c;
  }
  const int d = domain.dim();
  Matrix pts(total, d);
  std::vector<int> idx(d, 0);
  for (long row = 0; row < total; ++row) {
    for (int i = 0; i < d; ++i) {
      // Centered form keeps grids on symmetric domains exactly symmetric.
      const int m = counts[i] - 1;
      if (idx[i] == 0)
        pts(row, i) = domain.lo(i);
      else if (idx[i] == m)
        pts(row, i) = domain.hi(i);
      else
        pts(row, i) = 0.5 * (domain.lo(i) + domain.hi(i)) +
                      0.5 * domain.extent(i) * (static_cast<double>(2 * idx[i] - m) / m);
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
    }
  }
  return pts;
}

namespace {

// Unit-cube LHS in `d` dims; strata offsets are drawn from the open interval (0,1).
Matrix unit_lhs(int n, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix u(n, d);
  std::vector<int> perm(n);
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) {
      double offset = unif(rng);
      while (offset <= 0.0) offset = unif(rng);
      u(i, j) = (perm[i] + offset) / n;
    }
  }
  return u;
}

}  // namespace

Matrix lhs_sample(const Domain& domain, int n, Seed seed) {
  if (n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
  std::mt19937_64 rng(seed);
  Matrix u = unit_lhs(n, domain.dim(), rng);
  for (int j = 0; j < domain.dim(); ++j) {
    for (int i = 0; i < n; ++i) {
      double x = domain.lo(j) + u(i, j) * domain.extent(j);
      // Rounding can land on hi when the offset is within an ulp of 1.
      if (!(x < domain.hi(j))) x = std::nextafter(domain.hi(j), domain.lo(j));
      u(i, j) = x;
    }
  }
  return u;
}

Matrix boundary_sample(const Domain& domain, int n_per_face, Seed seed) {
  if (domain.dim() == 0) throw std::invalid_argument("boundary_sample: dim must be positive");
  if (n_per_face < 1) throw std::invalid_argument("boundary_sample: n_per_face must be >= 1");
  const int d = domain.dim();
  Matrix pts(2 * d * n_per_face, d);
  std::mt19937_64 rng(seed);
  for (int face_dim = 0; face_dim < d; ++face_dim) {
    Matrix tangential = d > 1 ? unit_lhs(n_per_face, d - 1, rng) : Matrix(n_per_face, 0);
    for (int side = 0; side < 2; ++side) {
      const long base = (2L * face_dim + side) * n_per_face;
      for (int i = 0; i < n_per_face; ++i) {
        int t = 0;
        for (int j = 0; j < d; ++j) {
          if (j == face_dim) {
            pts(base + i, j) = side == 0 ? domain.lo(j) : domain.hi(j);
          } else {
            pts(base + i, j) = domain.lo(j) + tangential(i, t++) * domain.extent(j);
          }
        }
      }
    }
  }
  return pts;
}

Vector periodic_axis(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("periodic_axis: n must be >= 1");
  Vector x(n);
  const double h = (hi - lo) / n;
  for (int j = 0; j < n; ++j) x(j) = lo + j * h;
  return x;
}

}  // namespace sdtm
