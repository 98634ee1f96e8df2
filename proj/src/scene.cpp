#include "mpilab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mpilab/error.hpp"
#include "mpilab/render.hpp"

namespace mpilab {

using nlohmann::json;

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::SinglePlane: return "single-plane";
    case SceneKind::TwoLayer: return "two-layer";
    case SceneKind::MultiLayer: return "multi-layer";
    case SceneKind::WorstCaseNoise: return "worst-case-noise";
  }
  return "?";
}

SceneKind scene_kind_from_string(const std::string& s) {
  for (SceneKind k : {SceneKind::SinglePlane, SceneKind::TwoLayer, SceneKind::MultiLayer,
                      SceneKind::WorstCaseNoise}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scene kind '" + s + "'");
}

void SceneSpec::validate() const {
  if (width < 2 || height < 2 || planes < 2) {
    throw Error(ErrorCode::InvalidArgument, "scene: width, height and planes must be >= 2");
  }
  sampling().validate();
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scene: focal lengths must be > 0");
  }
  const std::size_t needed = kind == SceneKind::SinglePlane ? 1
                             : kind == SceneKind::TwoLayer  ? 2
                                                            : 0;
  if (kind != SceneKind::WorstCaseNoise) {
    if (disparities.empty() || (needed && disparities.size() != needed)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("scene: ") + to_string(kind) + " needs " +
                      (needed ? std::to_string(needed) : std::string("at least one")) +
                      " disparities");
    }
    const double tol = 1e-9 * (1.0 + d_max);
    for (double d : disparities) {
      if (!(d >= d_min - tol && d <= d_max + tol)) {
        throw Error(ErrorCode::InvalidArgument, "scene: disparity " + std::to_string(d) +
                                                    " outside the sampled range");
      }
    }
  }
  if (kind == SceneKind::TwoLayer) {
    if (occluder.x0 < 0 || occluder.y0 < 0 || occluder.x1 > width || occluder.y1 > height ||
        occluder.width() <= 0 || occluder.height() <= 0) {
      throw Error(ErrorCode::InvalidArgument, "scene: occluder must lie inside the image");
    }
    if (!(disparities[1] > disparities[0])) {
      throw Error(ErrorCode::InvalidArgument,
                  "scene: foreground disparity must exceed the background's");
    }
  }
  if (baselines.empty()) {
    throw Error(ErrorCode::InvalidArgument, "scene: need at least one source baseline");
  }
  if (texture != "smooth" && texture != "noise") {
    throw Error(ErrorCode::InvalidArgument, "scene: texture must be 'smooth' or 'noise'");
  }
}

DisparitySampling SceneSpec::sampling() const { return DisparitySampling(d_min, d_max, planes); }

Camera SceneSpec::reference_camera() const {
  Camera c;
  c.intrinsics = CameraIntrinsics(fx, fy, 0.5, 0.5, width, height);
  return c;
}

json to_json(const SceneSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"width", s.width},
              {"height", s.height},
              {"planes", s.planes},
              {"d_min", s.d_min},
              {"d_max", s.d_max},
              {"fx", s.fx},
              {"fy", s.fy},
              {"disparities", s.disparities},
              {"occluder", {s.occluder.x0, s.occluder.y0, s.occluder.x1, s.occluder.y1}},
              {"seed", s.seed},
              {"baselines", s.baselines},
              {"texture", s.texture}};
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  try {
    if (j.contains("kind")) s.kind = scene_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("width")) s.width = j.at("width").get<int>();
    if (j.contains("height")) s.height = j.at("height").get<int>();
    if (j.contains("planes")) s.planes = j.at("planes").get<int>();
    if (j.contains("d_min")) s.d_min = j.at("d_min").get<double>();
    if (j.contains("d_max")) s.d_max = j.at("d_max").get<double>();
    if (j.contains("fx")) s.fx = j.at("fx").get<double>();
    if (j.contains("fy")) s.fy = j.at("fy").get<double>();
    if (j.contains("disparities")) s.disparities = j.at("disparities").get<std::vector<double>>();
    if (j.contains("occluder")) {
      const auto r = j.at("occluder").get<std::vector<int>>();
      if (r.size() != 4) throw Error(ErrorCode::InvalidArgument, "occluder needs 4 values");
      s.occluder = Rect{r[0], r[1], r[2], r[3]};
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("baselines")) s.baselines = j.at("baselines").get<std::vector<double>>();
    if (j.contains("texture")) s.texture = j.at("texture").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("scene spec: ") + e.what());
  }
  return s;
}

Camera offset_camera(const Camera& camera, const Eigen::Vector3d& offset) {
  Camera out = camera;
  out.pose = camera.pose.with_center(camera.pose.center() +
                                     camera.pose.rotation.transpose() * offset);
  return out;
}

Image smooth_texture(int width, int height, std::uint64_t seed, double min_period) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image img(width, height, 3);
  constexpr int kWaves = 6;
  for (int c = 0; c < 3; ++c) {
    struct Wave {
      double kx, ky, phase, amp;
    };
    std::vector<Wave> waves;
    double amp_sum = 0.0;
    for (int i = 0; i < kWaves; ++i) {
      const double period = min_period * (1.0 + 3.0 * unit(rng));
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const double k = 2.0 * std::numbers::pi / period;
      waves.push_back({k * std::cos(angle), k * std::sin(angle),
                       2.0 * std::numbers::pi * unit(rng), 0.5 + unit(rng)});
      amp_sum += waves.back().amp;
    }
    const double base = 0.3 + 0.4 * unit(rng);
    const double spread = std::min(base - 0.1, 0.9 - base);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 0.0;
        for (const Wave& w : waves) v += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
        img.at(x, y, c) = base + spread * v / amp_sum;
      }
    }
  }
  return img;
}

Image noise_texture(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Image img(width, height, 3);
  for (double& v : img.data()) v = unit(rng);
  return img;
}

namespace {

int nearest_plane(const DisparitySampling& s, double d) {
  return std::clamp(static_cast<int>(std::lround((d - s.d_min) / s.step())), 0, s.count - 1);
}

Image texture_for(const SceneSpec& spec, std::uint64_t seed) {
  return spec.texture == "noise" ? noise_texture(spec.width, spec.height, seed)
                                 : smooth_texture(spec.width, spec.height, seed);
}

// Foreground texture: a fine checker modulated by a smooth field, so it is
// clearly distinguishable from any smooth background.
Image foreground_texture(int width, int height, std::uint64_t seed) {
  Image base = smooth_texture(width, height, seed, 6.0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double check = ((x / 3 + y / 3) % 2) ? 0.15 : -0.15;
      for (int c = 0; c < 3; ++c)
        base.at(x, y, c) = std::clamp(base.at(x, y, c) + check, 0.0, 1.0);
    }
  return base;
}

void fill_plane(Mpi& mpi, int index, const Image& color, const Rect* region, double alpha) {
  for (int y = 0; y < mpi.height(); ++y)
    for (int x = 0; x < mpi.width(); ++x) {
      if (region && !region->contains(x, y)) continue;
      for (int c = 0; c < 3; ++c) mpi.color[index].at(x, y, c) = color.at(x, y, c);
      mpi.alpha[index].at(x, y) = alpha;
    }
}

}  // namespace

BandGeometry two_layer_band(const SceneSpec& spec, double baseline) {
  const DisparitySampling s = spec.sampling();
  const double d_bg = s.disparity(nearest_plane(s, spec.disparities[0]));
  const double d_fg = s.disparity(nearest_plane(s, spec.disparities[1]));
  const double u = spec.fx * spec.width * baseline;
  BandGeometry g;
  g.width_px = std::abs(u) * (d_fg - d_bg);
  g.height_px = spec.occluder.height();
  g.area_px = g.width_px * g.height_px;
  g.side = baseline >= 0.0 ? "right" : "left";
  return g;
}

SyntheticScene make_scene(const SceneSpec& spec) {
  spec.validate();
  SyntheticScene scene;
  scene.spec = spec;
  const DisparitySampling sampling = spec.sampling();
  const Camera reference = spec.reference_camera();
  scene.mpi = Mpi::zeros(reference, sampling);
  json geometry;
  geometry["kind"] = to_string(spec.kind);

  switch (spec.kind) {
    case SceneKind::SinglePlane: {
      const int p = nearest_plane(sampling, spec.disparities[0]);
      fill_plane(scene.mpi, p, texture_for(spec, spec.seed), nullptr, 1.0);
      scene.content_planes = {p};
      break;
    }
    case SceneKind::TwoLayer: {
      const int bg = nearest_plane(sampling, spec.disparities[0]);
      const int fg = nearest_plane(sampling, spec.disparities[1]);
      if (bg == fg) {
        throw Error(ErrorCode::InvalidArgument, "scene: both layers snap to the same plane");
      }
      fill_plane(scene.mpi, bg, texture_for(spec, spec.seed), nullptr, 1.0);
      fill_plane(scene.mpi, fg, foreground_texture(spec.width, spec.height, spec.seed + 1000),
                 &spec.occluder, 1.0);
      scene.content_planes = {bg, fg};
      geometry["occluder"] = {spec.occluder.x0, spec.occluder.y0, spec.occluder.x1,
                              spec.occluder.y1};
      json bands = json::array();
      for (double b : spec.baselines) {
        const BandGeometry g = two_layer_band(spec, b);
        bands.push_back({{"baseline", b},
                         {"band_width_px", g.width_px},
                         {"band_height_px", g.height_px},
                         {"band_area_px", g.area_px},
                         {"side", g.side}});
      }
      geometry["disocclusion_bands"] = bands;
      break;
    }
    case SceneKind::MultiLayer: {
      std::mt19937_64 rng(spec.seed + 17);
      std::vector<int> used;
      for (std::size_t i = 0; i < spec.disparities.size(); ++i) {
        const int p = nearest_plane(sampling, spec.disparities[i]);
        const Image tex = i == 0 ? texture_for(spec, spec.seed)
                                 : foreground_texture(spec.width, spec.height, spec.seed + i);
        if (i == 0) {
          fill_plane(scene.mpi, p, tex, nullptr, 1.0);
        } else {
          // Random rectangle covering 15-40% of each axis.
          std::uniform_int_distribution<int> wdist(spec.width * 15 / 100,
                                                   std::max(spec.width * 40 / 100, 2));
          std::uniform_int_distribution<int> hdist(spec.height * 15 / 100,
                                                   std::max(spec.height * 40 / 100, 2));
          const int rw = std::max(1, wdist(rng));
          const int rh = std::max(1, hdist(rng));
          std::uniform_int_distribution<int> xdist(0, spec.width - rw);
          std::uniform_int_distribution<int> ydist(0, spec.height - rh);
          const int x0 = xdist(rng);
          const int y0 = ydist(rng);
          const Rect r{x0, y0, x0 + rw, y0 + rh};
          fill_plane(scene.mpi, p, tex, &r, 1.0);
          geometry["layers"].push_back({{"plane", p}, {"rect", {r.x0, r.y0, r.x1, r.y1}}});
        }
        used.push_back(p);
      }
      scene.content_planes = used;
      break;
    }
    case SceneKind::WorstCaseNoise: {
      const int k = (spec.planes + 9) / 10;
      for (int j = 0; j < k; ++j) {
        const int p = spec.planes - k + j;
        fill_plane(scene.mpi, p, noise_texture(spec.width, spec.height, spec.seed + j), nullptr,
                   1.0 / (j + 1));  // equal transmittance 1/k per layer
        scene.content_planes.push_back(p);
      }
      break;
    }
  }
  geometry["content_planes"] = scene.content_planes;
  std::vector<double> content_disparities;
  for (int p : scene.content_planes) content_disparities.push_back(sampling.disparity(p));
  geometry["content_disparities"] = content_disparities;

  for (double b : spec.baselines) {
    const Camera cam = offset_camera(reference, Eigen::Vector3d(b, 0.0, 0.0));
    scene.sources.push_back(SourceView{composite(scene.mpi, cam).color, cam});
  }
  scene.geometry = geometry;
  return scene;
}

}  // namespace mpilab
