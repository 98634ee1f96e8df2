#include "mpilab/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpilab/error.hpp"

namespace mpilab {

void VisibleVolume::validate(const char* who) const {
  const std::string prefix = std::string(who) + ": ";
  if (static_cast<int>(c_vis.size()) != sampling.count ||
      static_cast<int>(alpha_vis.size()) != sampling.count) {
    throw Error(ErrorCode::ContractViolation, prefix + "plane count mismatch");
  }
  Image total(width(), height(), 1);
  for (int d = 0; d < sampling.count; ++d) {
    if (c_vis[d].width() != width() || c_vis[d].height() != height() ||
        c_vis[d].channels() != 3 || alpha_vis[d].width() != width() ||
        alpha_vis[d].height() != height() || alpha_vis[d].channels() != 1) {
      throw Error(ErrorCode::ContractViolation, prefix + "plane shape mismatch");
    }
    if (!c_vis[d].within_unit_range() || !alpha_vis[d].within_unit_range()) {
      throw Error(ErrorCode::ContractViolation,
                  prefix + "entries outside [0,1] on plane " + std::to_string(d));
    }
    for (std::size_t i = 0; i < total.data().size(); ++i)
      total.data()[i] += alpha_vis[d].data()[i];
  }
  for (double v : total.data()) {
    if (v > 1.0 + 1e-6) {
      throw Error(ErrorCode::ContractViolation, prefix + "alpha_vis sums above 1");
    }
  }
}

FlowVolume FlowVolume::zeros(int width, int height, int planes) {
  FlowVolume f;
  f.flow.assign(planes, Image(width, height, 2));
  return f;
}

void FlowVolume::validate(int width, int height, int planes, const char* who) const {
  const std::string prefix = std::string(who) + ": ";
  if (plane_count() != planes) {
    throw Error(ErrorCode::ContractViolation, prefix + "expected " + std::to_string(planes) +
                                                  " planes, got " +
                                                  std::to_string(plane_count()));
  }
  const double bound = std::max(width, height);
  for (const Image& f : flow) {
    if (f.width() != width || f.height() != height || f.channels() != 2) {
      throw Error(ErrorCode::ContractViolation, prefix + "plane shape mismatch");
    }
    if (!f.all_finite()) {
      throw Error(ErrorCode::ContractViolation, prefix + "non-finite flow");
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (std::hypot(f.at(x, y, 0), f.at(x, y, 1)) > bound) {
          throw Error(ErrorCode::ContractViolation, prefix + "flow magnitude exceeds image size");
        }
      }
    }
  }
}

std::size_t DisocclusionMask::count() const {
  std::size_t n = 0;
  for (double v : mask.data()) n += v > 0.5 ? 1 : 0;
  return n;
}

Eigen::Matrix3d mpi_plane_homography(const Mpi& mpi, const Camera& target, int index) {
  try {
    return oriented_plane_homography(mpi.reference, target, mpi.sampling.disparity(index),
                                     mpi.reference);
  } catch (const Error& e) {
    rethrow_with_context(e, "plane " + std::to_string(index));
  }
}

namespace {

PlaneStack warp_stack(const Mpi& mpi, const PlaneStack& planes, const Camera& target) {
  PlaneStack out;
  out.reserve(planes.size());
  for (int d = 0; d < static_cast<int>(planes.size()); ++d) {
    out.push_back(warp_image(planes[d], mpi_plane_homography(mpi, target, d), target.width(),
                             target.height()));
  }
  return out;
}

}  // namespace

Composite composite(const Mpi& mpi, const Camera& target) {
  const int w = target.width();
  const int h = target.height();
  Composite out{Image(w, h, 3), Image(w, h, 1)};
  for (int d = 0; d < mpi.plane_count(); ++d) {
    // Premultiply before warping so color and alpha are filtered together.
    Image rgba(mpi.width(), mpi.height(), 4);
    for (int y = 0; y < mpi.height(); ++y) {
      for (int x = 0; x < mpi.width(); ++x) {
        const double a = mpi.alpha[d].at(x, y);
        for (int c = 0; c < 3; ++c) rgba.at(x, y, c) = mpi.color[d].at(x, y, c) * a;
        rgba.at(x, y, 3) = a;
      }
    }
    const Image warped = warp_image(rgba, mpi_plane_homography(mpi, target, d), w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double a = warped.at(x, y, 3);
        for (int c = 0; c < 3; ++c) {
          out.color.at(x, y, c) = warped.at(x, y, c) + out.color.at(x, y, c) * (1.0 - a);
        }
        out.alpha.at(x, y) = a + out.alpha.at(x, y) * (1.0 - a);
      }
    }
  }
  return out;
}

PlaneStack transmittance(const PlaneStack& alpha) {
  PlaneStack t(alpha.size());
  if (alpha.empty()) return t;
  const int w = alpha[0].width();
  const int h = alpha[0].height();
  for (auto& plane : t) plane = Image(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double through = 1.0;
      for (int d = static_cast<int>(alpha.size()) - 1; d >= 0; --d) {
        const double a = alpha[d].at(x, y);
        t[d].at(x, y) = a * through;
        through *= 1.0 - a;
      }
    }
  }
  return t;
}

PlaneStack transmittance_reference(const Mpi& mpi) { return transmittance(mpi.alpha); }

PlaneStack transmittance_target(const Mpi& mpi, const Camera& target) {
  return transmittance(warp_stack(mpi, mpi.alpha, target));
}

VisibleVolume soft_remove_hidden(const Mpi& mpi) {
  VisibleVolume vis;
  vis.reference = mpi.reference;
  vis.sampling = mpi.sampling;
  vis.alpha_vis = transmittance_reference(mpi);
  vis.c_vis.reserve(mpi.plane_count());
  for (int d = 0; d < mpi.plane_count(); ++d) {
    Image c(mpi.width(), mpi.height(), 3);
    for (int y = 0; y < mpi.height(); ++y)
      for (int x = 0; x < mpi.width(); ++x)
        for (int ch = 0; ch < 3; ++ch)
          c.at(x, y, ch) = mpi.color[d].at(x, y, ch) * vis.alpha_vis[d].at(x, y);
    vis.c_vis.push_back(std::move(c));
  }
  return vis;
}

PlaneStack cumulative_visible_renders(const VisibleVolume& vis) {
  PlaneStack r;
  r.reserve(vis.c_vis.size());
  for (std::size_t d = 0; d < vis.c_vis.size(); ++d) {
    Image acc = vis.c_vis[d];
    if (d > 0) {
      auto dst = acc.data();
      auto prev = r[d - 1].data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += prev[i];
    }
    r.push_back(std::move(acc));
  }
  return r;
}

PlaneStack flow_gather(const PlaneStack& r_vis, const FlowVolume& flows) {
  if (r_vis.size() != flows.flow.size()) {
    throw Error(ErrorCode::InvalidArgument, "flow_gather: plane count mismatch");
  }
  PlaneStack out;
  out.reserve(r_vis.size());
  for (std::size_t d = 0; d < r_vis.size(); ++d) {
    const Image& src = r_vis[d];
    const Image& f = flows.flow[d];
    if (f.width() != src.width() || f.height() != src.height() || f.channels() != 2) {
      throw Error(ErrorCode::InvalidArgument, "flow_gather: shape mismatch");
    }
    Image g(src.width(), src.height(), src.channels());
    for (int y = 0; y < src.height(); ++y) {
      for (int x = 0; x < src.width(); ++x) {
        const double sx = x + f.at(x, y, 0);
        const double sy = y + f.at(x, y, 1);
        for (int c = 0; c < src.channels(); ++c) {
          g.at(x, y, c) = sample_bilinear_clamped(src, sx, sy, c);
        }
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

DisocclusionMask disocclusion_mask(const Mpi& mpi_init, const Camera& target, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "disocclusion_mask: epsilon must be in (0, 1]");
  }
  const PlaneStack t_target = transmittance_target(mpi_init, target);
  const PlaneStack t_ref_warped = warp_stack(mpi_init, transmittance_reference(mpi_init), target);
  DisocclusionMask m;
  m.epsilon = epsilon;
  m.mask = Image(target.width(), target.height(), 1);
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      double best = -1.0;
      for (std::size_t d = 0; d < t_target.size(); ++d) {
        best = std::max(best, t_target[d].at(x, y) - t_ref_warped[d].at(x, y));
      }
      m.mask.at(x, y) = best >= epsilon ? 1.0 : 0.0;
    }
  }
  return m;
}

}  // namespace mpilab
