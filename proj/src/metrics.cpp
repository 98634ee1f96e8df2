#include "mpilab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mpilab/error.hpp"

namespace mpilab {

namespace {

// Half-sample symmetric reflection: -1 -> 0, n -> n-1.
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(size);
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - r;
    k[i] = std::exp(-0.5 * x * x / (sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> filter(const std::vector<double>& src, int w, int h,
                           const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * src[y * w + reflect(x + i, w)];
      tmp[y * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[reflect(y + i, h) * w + x];
      out[y * w + x] = acc;
    }
  return out;
}

Image intersect(const Image& a, const Image& b) {
  Image out(a.width(), a.height(), 1);
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      out.at(x, y) = (a.at(x, y) > 0.5 && b.at(x, y) > 0.5) ? 1.0 : 0.0;
  return out;
}

std::size_t mask_count(const Image& mask) {
  std::size_t n = 0;
  for (double v : mask.data()) n += v > 0.5 ? 1 : 0;
  return n;
}

}  // namespace

Image ssim_map(const Image& a, const Image& b, const SsimParams& params) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::InvalidArgument, "ssim: image dimensions differ");
  }
  if (params.window < 1 || params.window % 2 == 0 || !(params.sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ssim: window must be odd and sigma > 0");
  }
  const int w = a.width();
  const int h = a.height();
  const int nc = a.channels();
  const auto k = gaussian_kernel(params.window, params.sigma);
  const std::size_t n = a.pixel_count();
  Image out(w, h, 1);
  std::vector<double> xa(n), xb(n), aa(n), bb(n), ab(n);
  for (int c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      xa[i] = a.data()[i * nc + c];
      xb[i] = b.data()[i * nc + c];
      aa[i] = xa[i] * xa[i];
      bb[i] = xb[i] * xb[i];
      ab[i] = xa[i] * xb[i];
    }
    const auto mu_a = filter(xa, w, h, k);
    const auto mu_b = filter(xb, w, h, k);
    const auto e_aa = filter(aa, w, h, k);
    const auto e_bb = filter(bb, w, h, k);
    const auto e_ab = filter(ab, w, h, k);
    for (std::size_t i = 0; i < n; ++i) {
      const double va = e_aa[i] - mu_a[i] * mu_a[i];
      const double vb = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + params.c1) * (2.0 * cov + params.c2);
      const double den =
          (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + params.c1) * (va + vb + params.c2);
      out.data()[i] += num / den / nc;
    }
  }
  return out;
}

double masked_mean(const Image& map, const Image& mask) {
  if (map.width() != mask.width() || map.height() != mask.height()) {
    throw Error(ErrorCode::InvalidArgument, "masked mean: mask size differs");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      if (mask.at(x, y) > 0.5) {
        sum += map.at(x, y);
        ++count;
      }
  if (count == 0) throw Error(ErrorCode::EmptyRegion, "mask selects no pixels");
  return sum / static_cast<double>(count);
}

Image fov_mask(const Mpi& mpi, const Camera& target) {
  const Image ones(mpi.width(), mpi.height(), 1, 1.0);
  Image mask(target.width(), target.height(), 1, 1.0);
  for (int d = 0; d < mpi.plane_count(); ++d) {
    const Image fp = warp_image(ones, mpi_plane_homography(mpi, target, d), target.width(),
                                target.height());
    for (std::size_t i = 0; i < mask.data().size(); ++i)
      if (fp.data()[i] < 0.999) mask.data()[i] = 0.0;
  }
  return mask;
}

double ssim_fov(const Image& pred, const Image& gt, const Mpi& mpi, const Camera& target,
                const SsimParams& params) {
  const Image mask = fov_mask(mpi, target);
  return masked_mean(ssim_map(pred, gt, params), mask);
}

OccScore ssim_occ(const Image& pred, const Image& gt, const Mpi& mpi_init,
                  const Camera& target, double epsilon, const SsimParams& params) {
  const Image mask =
      intersect(disocclusion_mask(mpi_init, target, epsilon).mask, fov_mask(mpi_init, target));
  OccScore score;
  score.count = mask_count(mask);
  if (score.count > 0) score.value = masked_mean(ssim_map(pred, gt, params), mask);
  return score;
}

Image gradient_magnitude(const Image& img) {
  const Image lum = luminance(img);
  const int w = lum.width();
  const int h = lum.height();
  Image out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = lum.at(std::min(x + 1, w - 1), y) - lum.at(std::max(x - 1, 0), y);
      const double gy = lum.at(x, std::min(y + 1, h - 1)) - lum.at(x, std::max(y - 1, 0));
      out.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

std::vector<double> gradient_histogram(const Image& grad, const Image* mask, int bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "histogram: bins must be >= 2");
  std::vector<double> hist(bins, 0.0);
  const double width = std::numbers::sqrt2 / bins;
  std::size_t count = 0;
  for (int y = 0; y < grad.height(); ++y) {
    for (int x = 0; x < grad.width(); ++x) {
      if (mask && mask->at(x, y) <= 0.5) continue;
      const int b = std::clamp(static_cast<int>(grad.at(x, y) / width), 0, bins - 1);
      hist[b] += 1.0;
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::EmptyRegion, "histogram: mask selects no pixels");
  for (double& v : hist) v /= static_cast<double>(count);
  return hist;
}

double wasserstein1(const std::vector<double>& a, const std::vector<double>& b,
                    double bin_width) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "wasserstein1: histogram sizes differ");
  }
  double ca = 0.0, cb = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    dist += std::abs(ca - cb);
  }
  return dist * bin_width;
}

double nat_from_distance(double w1) { return -std::log(std::max(w1, 1e-6)); }

double nat_occ(const Image& pred, const Image& gt, const Image& mask, int bins,
               NatReference reference) {
  if (pred.width() != gt.width() || pred.height() != gt.height() ||
      mask.width() != pred.width() || mask.height() != pred.height()) {
    throw Error(ErrorCode::InvalidArgument, "nat_occ: image and mask sizes differ");
  }
  const auto hp = gradient_histogram(gradient_magnitude(pred), &mask, bins);
  const auto hg = gradient_histogram(gradient_magnitude(gt),
                                     reference == NatReference::Masked ? &mask : nullptr, bins);
  return nat_from_distance(wasserstein1(hp, hg, std::numbers::sqrt2 / bins));
}

namespace {

template <typename F>
auto metric(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    rethrow_with_context(e, name);
  }
}

}  // namespace

MetricReport evaluate(const Image& pred, const Image& gt, const Mpi& mpi_init,
                      const Camera& target, const MetricParams& params) {
  MetricReport report;
  report.params = params;
  const Image map = metric("ssim", [&] { return ssim_map(pred, gt, params.ssim); });
  const Image fov = metric("ssim_fov", [&] { return fov_mask(mpi_init, target); });
  report.fov_pixel_count = mask_count(fov);
  report.ssim_fov = metric("ssim_fov", [&] { return masked_mean(map, fov); });
  const Image occ = metric("ssim_occ", [&] {
    return intersect(disocclusion_mask(mpi_init, target, params.epsilon).mask, fov);
  });
  report.occ_pixel_count = mask_count(occ);
  if (report.occ_pixel_count > 0) {
    report.ssim_occ = masked_mean(map, occ);
    report.nat_occ =
        metric("nat_occ", [&] { return nat_occ(pred, gt, occ, params.bins, params.nat_reference); });
  }
  return report;
}

}  // namespace mpilab
