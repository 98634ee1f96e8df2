#include "mpilab/image.hpp"

#include <algorithm>
#include <cmath>

#include "mpilab/error.hpp"

namespace mpilab {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

bool Image::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool Image::within_unit_range(double tol) const noexcept {
  return std::all_of(data_.begin(), data_.end(), [tol](double v) {
    return std::isfinite(v) && v >= -tol && v <= 1.0 + tol;
  });
}

void require_supported_channels(int channels, const std::string& what) {
  if (channels != 1 && channels != 3 && channels != 4) {
    throw Error(ErrorCode::InvalidArgument,
                what + ": channel count must be 1, 3 or 4, got " +
                    std::to_string(channels));
  }
}

double sample_bilinear_clamped(const Image& img, double x, double y, int c) {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
  const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (width == img.width() && height == img.height()) return img;
  Image out(width, height, img.channels());
  out.set_color_space(img.color_space());
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = sample_bilinear_clamped(img, src_x, src_y, c);
      }
    }
  }
  return out;
}

Image extract_channel(const Image& img, int c) {
  Image out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.at(x, y, c);
  return out;
}

Image luminance(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(x, y) = 0.2126 * img.at(x, y, 0) + 0.7152 * img.at(x, y, 1) +
                     0.0722 * img.at(x, y, 2);
    }
  }
  return out;
}

double max_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::InvalidArgument, "max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

}  // namespace mpilab
