#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mpilab {

enum class ColorSpace { Linear, Srgb };

/// Row-major, channel-interleaved image of doubles. Values are nominally in
/// [0,1] linear light; operations that need the range check it themselves.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  ColorSpace color_space() const noexcept { return color_space_; }
  void set_color_space(ColorSpace cs) noexcept { color_space_ = cs; }

  double& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  bool all_finite() const noexcept;
  bool within_unit_range(double tol = 0.0) const noexcept;

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  ColorSpace color_space_ = ColorSpace::Linear;
  std::vector<double> data_;
};

/// Throws InvalidArgument unless channels is 1, 3 or 4.
void require_supported_channels(int channels, const std::string& what);

/// Bilinear sample with border clamping; (x, y) in pixel-center coordinates.
double sample_bilinear_clamped(const Image& img, double x, double y, int c);

/// Resize with pixel-center alignment and bilinear interpolation.
/// Returns a copy when the size is unchanged.
Image resize_bilinear(const Image& img, int width, int height);

/// Extracts channel `c` as a single-channel image.
Image extract_channel(const Image& img, int c);

/// Rec. 709 luma for 3/4-channel images; the single channel otherwise.
Image luminance(const Image& img);

/// Largest absolute per-element difference; shapes must match.
double max_abs_diff(const Image& a, const Image& b);

}  // namespace mpilab
