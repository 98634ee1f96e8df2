#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <fftw3.h>

#include "mpilab/error.hpp"

namespace mpilab::detail {

Fft2d::Fft2d(int width, int height) : width_(width), height_(height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!buf) throw Error(ErrorCode::Numeric, "fft: allocation failed");
  buffer_ = buf;
  forward_plan_ = fftw_plan_dft_2d(height, width, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_2d(height, width, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_plan_ || !inverse_plan_) {
    throw Error(ErrorCode::Numeric, "fft: planning failed");
  }
}

Fft2d::~Fft2d() {
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(buffer_);
}

void Fft2d::forward(std::vector<cplx>& data) const {
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  if (data.size() != n) throw Error(ErrorCode::InvalidArgument, "fft: size mismatch");
  std::memcpy(buffer_, data.data(), n * sizeof(cplx));
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::memcpy(data.data(), buffer_, n * sizeof(cplx));
}

void Fft2d::inverse(std::vector<cplx>& data) const {
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  if (data.size() != n) throw Error(ErrorCode::InvalidArgument, "fft: size mismatch");
  std::memcpy(buffer_, data.data(), n * sizeof(cplx));
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::memcpy(data.data(), buffer_, n * sizeof(cplx));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : data) v *= scale;
}

}  // namespace mpilab::detail
