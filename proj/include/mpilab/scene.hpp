#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpilab/mpi.hpp"

namespace mpilab {

enum class SceneKind { SinglePlane, TwoLayer, MultiLayer, WorstCaseNoise };

const char* to_string(SceneKind kind);
SceneKind scene_kind_from_string(const std::string& s);

struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0, x1) x [y0, y1)
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Synthetic test scene. Disparities are inverse depths in scene units; each
/// content disparity is snapped to the nearest sampled plane.
struct SceneSpec {
  SceneKind kind = SceneKind::TwoLayer;
  int width = 64;
  int height = 64;
  int planes = 8;
  double d_min = 0.25;
  double d_max = 1.0;
  double fx = 1.0;
  double fy = 1.0;
  /// single-plane: {d}; two-layer: {background, foreground}; multi-layer:
  /// back to front. Ignored for worst-case-noise.
  std::vector<double> disparities{0.25, 0.5};
  Rect occluder{24, 16, 40, 48};  // two-layer foreground
  std::uint64_t seed = 1;
  /// Source camera offsets along the reference x axis, scene units.
  std::vector<double> baselines{0.0, 0.02};
  /// Texture of the background (and single plane): "smooth" or "noise".
  std::string texture = "smooth";

  void validate() const;
  DisparitySampling sampling() const;
  Camera reference_camera() const;
};

nlohmann::json to_json(const SceneSpec& spec);
/// Missing keys keep their defaults.
SceneSpec scene_spec_from_json(const nlohmann::json& j);

struct SyntheticScene {
  SceneSpec spec;
  Mpi mpi;                           // ground truth, straight color
  std::vector<int> content_planes;   // plane index per content layer
  std::vector<SourceView> sources;   // rendered at spec.baselines
  nlohmann::json geometry;           // analytic facts used by oracles
};

SyntheticScene make_scene(const SceneSpec& spec);

/// Camera translated by `offset` expressed in the camera's own axes.
Camera offset_camera(const Camera& camera, const Eigen::Vector3d& offset);

/// Smooth RGB texture: sum of seeded low-frequency sinusoids in [0.1, 0.9].
Image smooth_texture(int width, int height, std::uint64_t seed, double min_period = 12.0);

/// Per-pixel uniform RGB noise in [0, 1].
Image noise_texture(int width, int height, std::uint64_t seed);

/// Two-layer disocclusion band for a lateral target offset `baseline`
/// (scene units, camera x axis): width |u| * (d_fg - d_bg) pixels with
/// u = fx * W * baseline, height of the occluder, on the side the foreground
/// moves away from.
struct BandGeometry {
  double width_px = 0.0;
  double height_px = 0.0;
  double area_px = 0.0;
  std::string side;  // "right" for positive baseline
};
BandGeometry two_layer_band(const SceneSpec& spec, double baseline);

}  // namespace mpilab
