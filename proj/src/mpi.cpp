#include "mpilab/mpi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpilab/error.hpp"

namespace mpilab {

Mpi Mpi::zeros(const Camera& reference, const DisparitySampling& sampling) {
  Mpi mpi;
  mpi.reference = reference;
  mpi.sampling = sampling;
  mpi.color.assign(sampling.count, Image(reference.width(), reference.height(), 3));
  mpi.alpha.assign(sampling.count, Image(reference.width(), reference.height(), 1));
  return mpi;
}

void Mpi::validate(const char* who) const {
  const std::string prefix = std::string(who) + ": ";
  if (static_cast<int>(color.size()) != sampling.count ||
      static_cast<int>(alpha.size()) != sampling.count) {
    throw Error(ErrorCode::ContractViolation,
                prefix + "plane count does not match disparity sampling");
  }
  for (int d = 0; d < sampling.count; ++d) {
    const Image& c = color[d];
    const Image& a = alpha[d];
    if (c.width() != width() || c.height() != height() || c.channels() != 3 ||
        a.width() != width() || a.height() != height() || a.channels() != 1) {
      throw Error(ErrorCode::ContractViolation,
                  prefix + "plane " + std::to_string(d) + " has the wrong shape");
    }
    if (!c.within_unit_range()) {
      throw Error(ErrorCode::ContractViolation,
                  prefix + "color outside [0,1] on plane " + std::to_string(d));
    }
    if (!a.within_unit_range()) {
      throw Error(ErrorCode::ContractViolation,
                  prefix + "alpha outside [0,1] on plane " + std::to_string(d));
    }
  }
}

Image PlaneSweepVolume::slice(int plane, int source) const {
  const Image& p = planes.at(plane);
  Image out(p.width(), p.height(), 3);
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = p.at(x, y, 3 * source + c);
  return out;
}

namespace {

Image as_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = img.at(x, y, img.channels() == 1 ? 0 : c);
  return out;
}

}  // namespace

PlaneSweepVolume build_psv(std::span<const SourceView> sources, const Camera& reference,
                           const DisparitySampling& sampling) {
  if (sources.empty()) {
    throw Error(ErrorCode::InvalidArgument, "build_psv: need at least one source");
  }
  sampling.validate();
  const int w = reference.width();
  const int h = reference.height();
  const int n = static_cast<int>(sources.size());

  std::vector<Image> inputs;
  inputs.reserve(n);
  for (const auto& src : sources) {
    require_supported_channels(src.image.channels(), "build_psv");
    // The source camera keeps its normalized intrinsics at the new size.
    inputs.push_back(resize_bilinear(as_rgb(src.image), src.camera.width(),
                                     src.camera.height()));
  }

  PlaneSweepVolume psv;
  psv.reference = reference;
  psv.sampling = sampling;
  for (const auto& src : sources) psv.sources.push_back(src.camera);
  const auto disparities = sample_disparities(sampling);
  psv.planes.assign(sampling.count, Image(w, h, 3 * n));

  for (int d = 0; d < sampling.count; ++d) {
    Image& plane = psv.planes[d];
    for (int j = 0; j < n; ++j) {
      Eigen::Matrix3d hom;
      try {
        hom = oriented_plane_homography(sources[j].camera, reference, disparities[d],
                                        reference);
      } catch (const Error& e) {
        rethrow_with_context(e, "build_psv: source " + std::to_string(j) + ", plane " +
                                    std::to_string(d));
      }
      const Image warped = warp_image(inputs[j], hom, w, h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int c = 0; c < 3; ++c) plane.at(x, y, 3 * j + c) = warped.at(x, y, c);
    }
  }
  return psv;
}

Mpi resample_mpi(const Mpi& mpi, int new_width, int new_height, int new_plane_count) {
  if (new_width < 2 || new_height < 2 || new_plane_count < 2) {
    throw Error(ErrorCode::InvalidArgument, "resample_mpi: targets must be >= 2");
  }
  if (new_width == mpi.width() && new_height == mpi.height() &&
      new_plane_count == mpi.plane_count()) {
    return mpi;
  }

  // Spatial pass.
  std::vector<Image> color(mpi.plane_count());
  std::vector<Image> alpha(mpi.plane_count());
  for (int d = 0; d < mpi.plane_count(); ++d) {
    color[d] = resize_bilinear(mpi.color[d], new_width, new_height);
    alpha[d] = resize_bilinear(mpi.alpha[d], new_width, new_height);
  }

  Mpi out;
  out.reference = mpi.reference;
  out.reference.intrinsics = mpi.reference.intrinsics.resized(new_width, new_height);
  out.sampling = DisparitySampling(mpi.sampling.d_min, mpi.sampling.d_max, new_plane_count);

  if (new_plane_count == mpi.plane_count()) {
    out.color = std::move(color);
    out.alpha = std::move(alpha);
    return out;
  }

  // Disparity pass: each old plane joins the bin of its nearest new plane.
  // Upsampling never puts two old planes in one bin (the new step is
  // smaller), so order is kept and the reference render is unchanged.
  const int d_old = mpi.plane_count();
  const int d_new = new_plane_count;
  const double new_step = out.sampling.step();
  std::vector<std::vector<int>> bins(d_new);
  for (int j = 0; j < d_old; ++j) {
    const long nearest = std::lround((mpi.sampling.disparity(j) - out.sampling.d_min) / new_step);
    bins[std::clamp(static_cast<int>(nearest), 0, d_new - 1)].push_back(j);
  }

  out.color.assign(d_new, Image(new_width, new_height, 3));
  out.alpha.assign(d_new, Image(new_width, new_height, 1));
  for (int i = 0; i < d_new; ++i) {
    if (bins[i].empty()) continue;
    for (int y = 0; y < new_height; ++y) {
      for (int x = 0; x < new_width; ++x) {
        double transmit = 1.0;
        double weight_sum = 0.0;
        double rgb[3] = {0.0, 0.0, 0.0};
        double plain[3] = {0.0, 0.0, 0.0};
        for (int j : bins[i]) {
          const double a = alpha[j].at(x, y);
          transmit *= 1.0 - a;
          weight_sum += a;
          for (int c = 0; c < 3; ++c) {
            rgb[c] += a * color[j].at(x, y, c);
            plain[c] += color[j].at(x, y, c);
          }
        }
        out.alpha[i].at(x, y) = std::clamp(1.0 - transmit, 0.0, 1.0);
        for (int c = 0; c < 3; ++c) {
          // Fully transparent bins keep the plain mean so color stays defined.
          const double v = weight_sum > 0.0 ? rgb[c] / weight_sum
                                             : plain[c] / static_cast<double>(bins[i].size());
          out.color[i].at(x, y, c) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return out;
}

}  // namespace mpilab
