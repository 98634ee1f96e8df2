#pragma once

#include <Eigen/Core>
#include <vector>

#include "mpilab/image.hpp"

namespace mpilab {

/// Pinhole intrinsics normalized by image size: fx, cx by width and fy, cy by
/// height, as in the RealEstate10K camera files.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 2;
  int height = 2;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height);

  double focal_x_pixels() const { return fx * width; }
  double focal_y_pixels() const { return fy * height; }

  /// Pixel matrix with the origin at the center of the top-left pixel.
  Eigen::Matrix3d pixel_matrix() const;

  /// Same normalized intrinsics at another resolution.
  CameraIntrinsics resized(int new_width, int new_height) const;

  void validate() const;
};

/// World-to-camera rigid transform: X_cam = rotation * X_world + translation.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  CameraPose() = default;
  CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static CameraPose from_matrix(const Eigen::Matrix<double, 3, 4>& world_to_camera);
  Eigen::Matrix<double, 3, 4> matrix() const;

  /// Camera center in world coordinates.
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  /// Pose with the same orientation and its center moved to `center`.
  CameraPose with_center(const Eigen::Vector3d& center) const;

  void validate() const;
};

struct Camera {
  CameraIntrinsics intrinsics;
  CameraPose pose;

  int width() const { return intrinsics.width; }
  int height() const { return intrinsics.height; }
};

/// Uniform sampling in disparity (inverse depth): count planes from d_min to
/// d_max inclusive. Index 0 is the farthest plane.
struct DisparitySampling {
  double d_min = 0.0;
  double d_max = 1.0;
  int count = 2;

  DisparitySampling() = default;
  DisparitySampling(double d_min, double d_max, int count);

  double step() const { return (d_max - d_min) / (count - 1); }
  double disparity(int index) const { return d_min + index * step(); }
  void validate() const;

  friend bool operator==(const DisparitySampling&, const DisparitySampling&) = default;
};

/// Translation-only offset of a target view relative to a reference view in
/// the f=1 analysis units: lateral u in pixels, axial s positive forward.
struct RelativeView {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  double s = 0.0;
};

std::vector<double> sample_disparities(const DisparitySampling& sampling);

/// Homography taking target-view pixels to source-view pixels through the
/// plane at `disparity` (inverse depth), fronto-parallel in `plane_camera`.
/// Normalized so the bottom-right entry is 1 when it is nonzero.
/// Throws DegenerateGeometry when the condition number exceeds 1e12.
Eigen::Matrix3d plane_homography(const Camera& source, const Camera& target,
                                 double disparity, const Camera& plane_camera);

/// Plane fronto-parallel in the source camera (MPI rendering).
Eigen::Matrix3d plane_homography(const Camera& source, const Camera& target,
                                 double disparity);

/// As plane_homography, but kept at the scale where the third homogeneous
/// coordinate of a mapped pixel is positive iff the plane point lies in front
/// of both cameras. warp_image treats w <= 0 as outside the source domain.
Eigen::Matrix3d oriented_plane_homography(const Camera& source, const Camera& target,
                                          double disparity, const Camera& plane_camera);

/// Backward bilinear warp: out(p) = img(H p). Samples that fall outside
/// [0, w-1] x [0, h-1] or behind the source camera are zero in every channel.
Image warp_image(const Image& img, const Eigen::Matrix3d& homography, int out_width,
                 int out_height);

/// Requires equal rotations (max entry difference 1e-4); throws DomainError
/// otherwise since the analysis model is translation-only.
RelativeView relative_view(const CameraPose& reference, const CameraPose& target,
                           const CameraIntrinsics& intrinsics);

/// Condition number (ratio of extreme singular values).
double condition_number(const Eigen::Matrix3d& m);

}  // namespace mpilab
