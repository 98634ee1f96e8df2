#pragma once

#include <complex>
#include <vector>

namespace mpilab::detail {

using cplx = std::complex<double>;

/// In-place 2D complex DFT on row-major h x w buffers. Plans are built once
/// with FFTW_ESTIMATE so results do not depend on planner timing.
class Fft2d {
 public:
  Fft2d(int width, int height);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int width() const { return width_; }
  int height() const { return height_; }

  /// Unnormalized forward transform (exponent sign -1).
  void forward(std::vector<cplx>& data) const;
  /// Inverse transform including the 1/(w*h) factor.
  void inverse(std::vector<cplx>& data) const;

 private:
  int width_;
  int height_;
  void* buffer_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Signed frequency of DFT bin i for length n: 0, 1, ..., n/2-1, -n/2, ..., -1.
inline int signed_frequency(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

}  // namespace mpilab::detail
