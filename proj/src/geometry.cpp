#include "mpilab/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mpilab/error.hpp"

namespace mpilab {

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_,
                                   int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
  validate();
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "intrinsics: focal lengths must be positive");
  }
  if (!(cx > 0.0 && cx < 1.0) || !(cy > 0.0 && cy < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "intrinsics: principal point must lie inside (0,1)");
  }
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::InvalidArgument, "intrinsics: image must be at least 2x2");
  }
}

Eigen::Matrix3d CameraIntrinsics::pixel_matrix() const {
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = fx * width;
  k(1, 1) = fy * height;
  k(0, 2) = cx * width - 0.5;
  k(1, 2) = cy * height - 0.5;
  return k;
}

CameraIntrinsics CameraIntrinsics::resized(int new_width, int new_height) const {
  return CameraIntrinsics(fx, fy, cx, cy, new_width, new_height);
}

CameraPose::CameraPose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t)
    : rotation(r), translation(t) {
  validate();
}

CameraPose CameraPose::from_matrix(const Eigen::Matrix<double, 3, 4>& m) {
  return CameraPose(m.leftCols<3>(), m.col(3));
}

Eigen::Matrix<double, 3, 4> CameraPose::matrix() const {
  Eigen::Matrix<double, 3, 4> m;
  m.leftCols<3>() = rotation;
  m.col(3) = translation;
  return m;
}

CameraPose CameraPose::with_center(const Eigen::Vector3d& c) const {
  return CameraPose(rotation, -rotation * c);
}

void CameraPose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "pose: non-finite entries");
  }
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho >= 1e-6 || rotation.determinant() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "pose: rotation is not orthonormal with determinant +1");
  }
}

DisparitySampling::DisparitySampling(double lo, double hi, int n)
    : d_min(lo), d_max(hi), count(n) {
  validate();
}

void DisparitySampling::validate() const {
  if (!(d_min >= 0.0) || !(d_max > d_min) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::InvalidArgument,
                "disparity sampling: require 0 <= d_min < d_max");
  }
  if (count < 2) {
    throw Error(ErrorCode::InvalidArgument, "disparity sampling: need at least 2 planes");
  }
}

std::vector<double> sample_disparities(const DisparitySampling& sampling) {
  std::vector<double> out(sampling.count);
  for (int i = 0; i < sampling.count; ++i) out[i] = sampling.disparity(i);
  out.back() = sampling.d_max;
  return out;
}

double condition_number(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto sv = svd.singularValues();
  if (sv(2) <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(2);
}

Eigen::Matrix3d oriented_plane_homography(const Camera& source, const Camera& target,
                                          double disparity, const Camera& plane_camera) {
  if (!(disparity >= 0.0) || !std::isfinite(disparity)) {
    throw Error(ErrorCode::InvalidArgument, "plane_homography: disparity must be >= 0");
  }
  const Eigen::Matrix3d& rs = source.pose.rotation;
  const Eigen::Matrix3d& rt = target.pose.rotation;
  const Eigen::Matrix3d& rp = plane_camera.pose.rotation;
  const Eigen::Matrix3d r_st = rs * rt.transpose();
  const Eigen::Vector3d t_st = source.pose.translation - r_st * target.pose.translation;
  const Eigen::Matrix3d r_pt = rp * rt.transpose();
  const Eigen::Vector3d t_pt = plane_camera.pose.translation - r_pt * target.pose.translation;

  // Plane in target coordinates: a . X_t = b.
  const Eigen::Vector3d normal(0.0, 0.0, 1.0);
  const Eigen::Vector3d a = disparity * (r_pt.transpose() * normal);
  const double b = 1.0 - disparity * normal.dot(t_pt);

  const Eigen::Matrix3d m = b * r_st + t_st * a.transpose();
  Eigen::Matrix3d h = source.intrinsics.pixel_matrix() * m *
                      target.intrinsics.pixel_matrix().inverse();
  const double cond = condition_number(h);
  if (!(cond <= 1e12) || std::abs(b) < 1e-15) {
    throw Error(ErrorCode::DegenerateGeometry,
                "plane homography is degenerate (target camera on or inside the plane at "
                "disparity " + std::to_string(disparity) + ")");
  }
  return h / b;
}

Eigen::Matrix3d plane_homography(const Camera& source, const Camera& target,
                                 double disparity, const Camera& plane_camera) {
  Eigen::Matrix3d h = oriented_plane_homography(source, target, disparity, plane_camera);
  if (h(2, 2) != 0.0) h /= h(2, 2);
  return h;
}

Eigen::Matrix3d plane_homography(const Camera& source, const Camera& target,
                                 double disparity) {
  return plane_homography(source, target, disparity, source);
}

Image warp_image(const Image& img, const Eigen::Matrix3d& h, int out_width,
                 int out_height) {
  require_supported_channels(img.channels(), "warp_image");
  if (!h.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "warp_image: homography must be finite");
  }
  const int w = img.width();
  const int ht = img.height();
  const int nc = img.channels();
  Image out(out_width, out_height, nc);
  out.set_color_space(img.color_space());
  constexpr double kEdge = 1e-9;
  const double max_x = w - 1 + kEdge;
  const double max_y = ht - 1 + kEdge;
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const double pz = h(2, 0) * x + h(2, 1) * y + h(2, 2);
      if (!(pz > 0.0)) continue;
      const double sx = (h(0, 0) * x + h(0, 1) * y + h(0, 2)) / pz;
      const double sy = (h(1, 0) * x + h(1, 1) * y + h(1, 2)) / pz;
      if (!(sx >= -kEdge && sx <= max_x && sy >= -kEdge && sy <= max_y)) continue;
      const int x0 = std::min(static_cast<int>(std::floor(std::max(sx, 0.0))), w - 1);
      const int y0 = std::min(static_cast<int>(std::floor(std::max(sy, 0.0))), ht - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, ht - 1);
      const double fx = std::clamp(sx - x0, 0.0, 1.0);
      const double fy = std::clamp(sy - y0, 0.0, 1.0);
      const double w00 = (1.0 - fx) * (1.0 - fy);
      const double w10 = fx * (1.0 - fy);
      const double w01 = (1.0 - fx) * fy;
      const double w11 = fx * fy;
      for (int c = 0; c < nc; ++c) {
        double v = w00 * img.at(x0, y0, c);
        if (w10 != 0.0) v += w10 * img.at(x1, y0, c);
        if (w01 != 0.0) v += w01 * img.at(x0, y1, c);
        if (w11 != 0.0) v += w11 * img.at(x1, y1, c);
        out.at(x, y, c) = v;
      }
    }
  }
  return out;
}

RelativeView relative_view(const CameraPose& reference, const CameraPose& target,
                           const CameraIntrinsics& intrinsics) {
  const double mismatch = (reference.rotation - target.rotation).cwiseAbs().maxCoeff();
  if (mismatch > 1e-4) {
    throw Error(ErrorCode::DomainError,
                "relative_view: rotations differ; the analysis model is translation-only");
  }
  const Eigen::Vector3d offset =
      reference.rotation * (target.center() - reference.center());
  RelativeView view;
  view.u = Eigen::Vector2d(offset.x() * intrinsics.focal_x_pixels(),
                           offset.y() * intrinsics.focal_y_pixels());
  view.s = offset.z();
  return view;
}

}  // namespace mpilab
