#pragma once

#include <span>
#include <vector>

#include "mpilab/geometry.hpp"
#include "mpilab/image.hpp"

namespace mpilab {

/// Multiplane image: D fronto-parallel RGBA planes in the reference frustum.
/// Color is straight (not premultiplied); compositing premultiplies.
/// Plane index 0 is the farthest (smallest disparity).
struct Mpi {
  Camera reference;
  DisparitySampling sampling;
  std::vector<Image> color;  // D planes, 3 channels
  std::vector<Image> alpha;  // D planes, 1 channel

  int width() const { return reference.width(); }
  int height() const { return reference.height(); }
  int plane_count() const { return static_cast<int>(color.size()); }

  /// All-transparent black MPI.
  static Mpi zeros(const Camera& reference, const DisparitySampling& sampling);

  /// Throws ContractViolation (with `who` in the message) when shapes disagree
  /// or any entry is non-finite or outside [0,1].
  void validate(const char* who = "mpi") const;
};

/// One input image and the camera that captured it.
struct SourceView {
  Image image;
  Camera camera;
};

/// Input images reprojected onto every plane of the reference frustum. Each
/// plane holds 3N channels in source-major order [src0 RGB | src1 RGB | ...].
struct PlaneSweepVolume {
  Camera reference;
  DisparitySampling sampling;
  std::vector<Camera> sources;
  std::vector<Image> planes;

  int source_count() const { return static_cast<int>(sources.size()); }
  int plane_count() const { return static_cast<int>(planes.size()); }
  int width() const { return reference.width(); }
  int height() const { return reference.height(); }

  /// The RGB slice of one source on one plane.
  Image slice(int plane, int source) const;
};

/// Sources are first resized to the reference resolution, then each is warped
/// onto every plane (planes fronto-parallel in the reference camera). Plane
/// regions behind a source camera come out as zeros.
PlaneSweepVolume build_psv(std::span<const SourceView> sources, const Camera& reference,
                           const DisparitySampling& sampling);

/// Spatial bilinear resampling per plane, then disparity resampling by box
/// aggregation: every old plane goes to the bin of its nearest new plane.
/// Within a bin alpha is 1-Π(1-α) and color the alpha-weighted mean; empty
/// bins are transparent. Increasing the plane count keeps the reference
/// render. Identical dimensions return a copy.
Mpi resample_mpi(const Mpi& mpi, int new_width, int new_height, int new_plane_count);

}  // namespace mpilab
