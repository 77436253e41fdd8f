#pragma once

// Thin owner of an FFTW real-to-complex / complex-to-real plan pair.
// Planning is serialized process-wide; execution on private buffers is
// thread-safe.

#include <complex>
#include <vector>

namespace sdtm::detail {

class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int modes() const { return n_ / 2 + 1; }

  /// Unnormalized forward transform: X_j = sum_m x_m exp(-2 pi i j m / n).
  void forward(const double* in, std::complex<double>* out);
  /// Inverse with 1/n normalization, so inverse(forward(x)) == x.
  void inverse(const std::complex<double>* in, double* out);

 private:
  int n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

}  // namespace sdtm::detail
