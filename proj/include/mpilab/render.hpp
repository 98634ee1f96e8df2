#pragma once

#include <vector>

#include "mpilab/mpi.hpp"

namespace mpilab {

/// Per-plane stack of same-sized images; index 0 is the farthest plane.
using PlaneStack = std::vector<Image>;

/// Content that survives occlusion at the reference view: c_vis is color
/// weighted by reference transmittance, alpha_vis is that transmittance.
struct VisibleVolume {
  Camera reference;
  DisparitySampling sampling;
  PlaneStack c_vis;      // 3 channels per plane
  PlaneStack alpha_vis;  // 1 channel per plane

  int width() const { return reference.width(); }
  int height() const { return reference.height(); }
  int plane_count() const { return static_cast<int>(c_vis.size()); }

  void validate(const char* who = "visible volume") const;
};

/// Per-voxel 2D flow in pixels at plane resolution (channel 0 = x, 1 = y).
struct FlowVolume {
  PlaneStack flow;

  static FlowVolume zeros(int width, int height, int planes);
  int plane_count() const { return static_cast<int>(flow.size()); }

  /// Finite and |f| <= max(W, H) everywhere, with the expected shape.
  void validate(int width, int height, int planes, const char* who = "flow volume") const;
};

struct DisocclusionMask {
  Image mask;  // 1 channel, values 0 or 1
  double epsilon = 0.075;

  std::size_t count() const;
};

struct Composite {
  Image color;  // 3 channels
  Image alpha;  // accumulated alpha, 1 channel
};

/// Homography used to draw MPI plane `index` into `target`.
Eigen::Matrix3d mpi_plane_homography(const Mpi& mpi, const Camera& target, int index);

/// Back-to-front over compositing of the warped planes:
/// out <- warp(c*a) + out * (1 - warp(a)).
Composite composite(const Mpi& mpi, const Camera& target);

/// t(d) = a(d) * prod_{d' > d} (1 - a(d')) for a stack ordered far to near.
PlaneStack transmittance(const PlaneStack& alpha);

PlaneStack transmittance_reference(const Mpi& mpi);

/// Transmittance of the alpha planes warped into the target view.
PlaneStack transmittance_target(const Mpi& mpi, const Camera& target);

VisibleVolume soft_remove_hidden(const Mpi& mpi);

/// r_vis(d) = sum_{d' <= d} c_vis(d'), accumulated far to near.
PlaneStack cumulative_visible_renders(const VisibleVolume& vis);

/// c_fin(x, y, d) = r_vis(x + fx, y + fy, d), bilinear with border clamping.
PlaneStack flow_gather(const PlaneStack& r_vis, const FlowVolume& flows);

/// Pixels where max_d (t_target - warp(t_reference)) >= epsilon. The
/// reference transmittance is warped with the same plane homographies.
DisocclusionMask disocclusion_mask(const Mpi& mpi_init, const Camera& target,
                                   double epsilon = 0.075);

}  // namespace mpilab
