#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mpilab/mpi.hpp"
#include "mpilab/render.hpp"

namespace mpilab {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double c1 = 1e-4;  // (0.01)^2 on [0,1] data
  double c2 = 9e-4;  // (0.03)^2
};

/// Same-size SSIM map with a Gaussian window and reflect padding. Multi-channel
/// inputs are scored per channel and averaged.
Image ssim_map(const Image& a, const Image& b, const SsimParams& params = {});

/// Mean of `map` over pixels where `mask` > 0.5. Throws EmptyRegion on an
/// empty selection.
double masked_mean(const Image& map, const Image& mask);

/// Pixels that see every MPI plane: the warped all-ones footprint is >= 0.999
/// on all planes.
Image fov_mask(const Mpi& mpi, const Camera& target);

double ssim_fov(const Image& pred, const Image& gt, const Mpi& mpi, const Camera& target,
                const SsimParams& params = {});

struct OccScore {
  std::optional<double> value;  // absent when the region is empty
  std::size_t count = 0;
};

/// Mean SSIM over disocclusion_mask(mpi_init) intersected with the fov mask.
OccScore ssim_occ(const Image& pred, const Image& gt, const Mpi& mpi_init,
                  const Camera& target, double epsilon = 0.075,
                  const SsimParams& params = {});

enum class NatReference {
  Masked,     // ground-truth histogram over the same masked pixels
  FullImage,  // ground-truth histogram over the whole target image
};

/// Gradient magnitude of Rec. 709 luminance by central differences (no 1/2
/// factor, replicated borders), so [0,1] data stays within [0, sqrt(2)].
Image gradient_magnitude(const Image& img);

/// Histogram of values over [0, sqrt(2)] in `bins` uniform bins, normalized
/// to sum 1. Values above the range land in the last bin.
std::vector<double> gradient_histogram(const Image& grad, const Image* mask, int bins);

/// W1 between two normalized histograms on a shared uniform grid.
double wasserstein1(const std::vector<double>& a, const std::vector<double>& b,
                    double bin_width);

/// -log(max(w1, 1e-6)).
double nat_from_distance(double w1);

double nat_occ(const Image& pred, const Image& gt, const Image& mask, int bins = 64,
               NatReference reference = NatReference::Masked);

struct MetricParams {
  double epsilon = 0.075;
  int bins = 64;
  SsimParams ssim;
  NatReference nat_reference = NatReference::Masked;
};

struct MetricReport {
  double ssim_fov = 0.0;
  std::optional<double> ssim_occ;
  std::optional<double> nat_occ;
  std::size_t fov_pixel_count = 0;
  std::size_t occ_pixel_count = 0;
  MetricParams params;
};

/// All three metrics with masks computed from mpi_init. Errors carry the
/// metric name.
MetricReport evaluate(const Image& pred, const Image& gt, const Mpi& mpi_init,
                      const Camera& target, const MetricParams& params = {});

}  // namespace mpilab
