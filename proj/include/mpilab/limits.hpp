#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mpilab/image.hpp"

namespace mpilab {

/// Grayscale no-occlusion MPI: each plane holds premultiplied contribution
/// c(x, y, d). An empty plane vector stands for an all-zero plane.
struct AnalysisMpi {
  int width = 0;
  int height = 0;
  std::vector<double> disparities;           // ascending, 1/pixel
  std::vector<std::vector<double>> planes;   // row-major width*height or empty
  double dx = 1.0;                           // spatial sampling interval, pixels
  double dd = 0.0;                           // disparity sampling interval
  double d_max = 0.0;                        // disparity used for linearization

  int plane_count() const { return static_cast<int>(planes.size()); }
  bool is_zero(int index) const { return planes[index].empty(); }
  void validate() const;

  /// Sum over planes (the render at u = 0, s = 0).
  Image plane_sum() const;
};

/// The viewpoint region where renders keep the full image bandwidth:
/// s <= 0 and |u| <= dx * (1 - s * d_max) / dd.
struct RenderableRange {
  double dx = 1.0;
  double dd = 1.0;
  double d_max = 1.0;

  /// Throws DomainError for s > 0, where no bandwidth guarantee exists.
  double u_max(double s) const;
};

RenderableRange renderable_range(double dx, double dd, double d_max);

/// Content on the nearest ceil(0.1 * D) of D planes sampled on [0, d_max].
/// Each content plane is seeded Gaussian noise (mean 0.5/K, sd 0.125/K for K
/// content planes), optionally low-passed with a radial brick wall at
/// band_fraction of Nyquist.
AnalysisMpi worst_case_mpi(int height, int width, int planes, double d_max,
                           double band_fraction, std::uint64_t seed);

/// The same volume with its content moved rigidly to the planes ending at
/// `last_index` (content-plane order preserved).
AnalysisMpi shift_content(const AnalysisMpi& a, int last_index);

enum class ProjectionMode { Exact, Linearized };
enum class Boundary { Periodic, Zero };

struct DirectRenderOptions {
  ProjectionMode mode = ProjectionMode::Exact;
  Boundary boundary = Boundary::Periodic;
  /// Low-pass each plane to 1/m of Nyquist before a minifying (m > 1) resample.
  bool antialias = false;
};

/// r(x) = sum_d c(m_d (x - x0) + x0 + u d, d), with x0 = (W/2, H/2) and
/// m_d = 1 - s d (exact) or 1 - s d_max (linearized). Bilinear sampling.
/// Requires s < 1/d_max.
Image direct_projection_render(const AnalysisMpi& a, const Eigen::Vector2d& u, double s,
                               const DirectRenderOptions& options = {});

/// Fourier-slice renderer with cached per-plane spectra. The render spectrum
/// at frequency k is the plane-summed, sheared spectrum at k / m with
/// m = 1 - s d_max (periodic boundary, linearized dilation). The dilated
/// signal is synthesized exactly by evaluating the Fourier series at the
/// positions m (x - x0) + x0; bins that would pass the render Nyquist are
/// dropped.
class SpectralRenderer {
 public:
  explicit SpectralRenderer(const AnalysisMpi& a);
  ~SpectralRenderer();
  SpectralRenderer(SpectralRenderer&&) noexcept;
  SpectralRenderer& operator=(SpectralRenderer&&) noexcept;

  Image render(const Eigen::Vector2d& u, double s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Image fourier_slice_render(const AnalysisMpi& a, const Eigen::Vector2d& u, double s);

/// Smallest radial frequency (fraction of the axis Nyquist, so corners reach
/// sqrt(2)) below which `energy_quantile` of the spectral energy lies. The
/// image mean is removed and a Hann window applied; DC is excluded. Returns 0
/// for images without non-DC energy.
double measure_bandwidth(const Image& img, double energy_quantile = 0.95);

/// Radial brick-wall low pass at `band_fraction` of Nyquist (periodic).
std::vector<double> lowpass_radial(const std::vector<double>& plane, int width, int height,
                                   double band_fraction);

/// The 8x-denser reference MPI: disparity is reconstructed between the D
/// samples with a tent (linear) kernel and resampled at dd / factor. The grid
/// extends (factor-1)/factor * dd past both ends so every coarse plane keeps
/// unit total weight. d_max is inherited.
AnalysisMpi tent_oracle(const AnalysisMpi& a, int factor = 8);

/// PSNR in dB with the reference's data range (max - min) as peak. Identical
/// images return kPsnrCeiling.
inline constexpr double kPsnrCeiling = 300.0;
double psnr_data_range(const Image& test, const Image& reference);

struct BandwidthSample {
  double u = 0.0;
  double psnr = 0.0;
  double bandwidth = 0.0;
};

struct BandwidthReport {
  std::vector<BandwidthSample> curve;  // ascending u
  std::optional<double> onset;         // u*, absent when beyond the scan range
  double resolution = 0.0;             // scan step
};

struct EmpiricalRangeOptions {
  double fidelity_threshold = 30.0;  // dB
  double scan_max_factor = 2.5;      // scan up to this multiple of the prediction
  int steps_per_prediction = 20;     // scan step = prediction / this
  int oracle_factor = 8;
  double energy_quantile = 0.95;
};

struct EmpiricalRange {
  double predicted_u_max = 0.0;
  double scan_max = 0.0;
  BandwidthReport report;
};

/// Renders the D-plane MPI and its tent oracle at u = (u, 0), u = 0, step,
/// ..., and reports the first u where PSNR(coarse vs. oracle) falls below the
/// threshold (linearly interpolated between scan points). Both volumes are
/// rendered with the Fourier-slice renderer. s > 0 is rejected because the
/// scan is sized from renderable_range.
EmpiricalRange empirical_range(const AnalysisMpi& a, double s,
                               const EmpiricalRangeOptions& options = {});

}  // namespace mpilab
