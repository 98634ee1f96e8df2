#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "mpilab/camera_file.hpp"
#include "mpilab/dataset.hpp"
#include "mpilab/error.hpp"
#include "mpilab/estimator.hpp"
#include "mpilab/flow_io.hpp"
#include "mpilab/image_io.hpp"
#include "mpilab/limits.hpp"
#include "mpilab/metrics.hpp"
#include "mpilab/mpi_io.hpp"
#include "mpilab/render.hpp"
#include "mpilab/scene.hpp"

namespace mpilab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads a flat JSON object of option values for the selected subcommand.
// Keys are long option names; underscores and dashes are interchangeable.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::vector<std::string> parents) : parents_(std::move(parents)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.parents = parents_;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number() || v.is_null()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }

  std::vector<std::string> parents_;
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_run_json(const fs::path& out, const std::string& command, const json& config) {
  write_json(out / "run.json", json{{"command", command}, {"config", config}});
}

std::string frame_name(int index, const char* prefix, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05d.%s", prefix, index, ext);
  return buf;
}

CameraPose pose_from_values(const std::vector<double>& v) {
  if (v.size() != 12) {
    throw Error(ErrorCode::InvalidArgument, "--pose needs 12 values (3x4 row-major)");
  }
  Eigen::Matrix<double, 3, 4> m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = v[4 * r + c];
  return CameraPose::from_matrix(m);
}

Eigen::Vector3d vec3(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) {
    throw Error(ErrorCode::InvalidArgument, std::string(flag) + " needs 3 values");
  }
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  SceneSpec spec;
  std::string kind = "two-layer";
  std::vector<int> occluder{24, 16, 40, 48};
  std::string out;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  app.add_option("--kind", a.kind, "single-plane | two-layer | multi-layer | worst-case-noise");
  app.add_option("--width", a.spec.width);
  app.add_option("--height", a.spec.height);
  app.add_option("--planes", a.spec.planes, "number of MPI planes D");
  app.add_option("--d-min", a.spec.d_min);
  app.add_option("--d-max", a.spec.d_max);
  app.add_option("--fx", a.spec.fx, "focal length normalized by width");
  app.add_option("--fy", a.spec.fy, "focal length normalized by height");
  app.add_option("--disparities", a.spec.disparities, "content disparities, back to front");
  app.add_option("--occluder", a.occluder, "x0 y0 x1 y1 (half-open)")->expected(4);
  app.add_option("--seed", a.spec.seed);
  app.add_option("--baselines", a.spec.baselines, "source offsets along camera x");
  app.add_option("--texture", a.spec.texture, "smooth | noise");
  app.add_option("--out", a.out, "output directory")->required();
}

int cmd_synth(SynthArgs& a) {
  a.spec.kind = scene_kind_from_string(a.kind);
  a.spec.occluder = Rect{a.occluder[0], a.occluder[1], a.occluder[2], a.occluder[3]};
  const SyntheticScene scene = make_scene(a.spec);
  const fs::path out(a.out);
  ensure_dir(out);
  save_mpi(scene.mpi, out / "mpi");
  std::vector<TrajectoryFrame> frames;
  for (std::size_t i = 0; i < scene.sources.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "source_%02zu.png", i);
    write_png16(out / name, scene.sources[i].image);
    frames.push_back(TrajectoryFrame{static_cast<std::int64_t>(i), scene.sources[i].camera});
  }
  write_trajectory(out / "cameras.txt", frames);
  write_json(out / "geometry.json", scene.geometry);
  write_json(out / "scene.json", to_json(a.spec));
  write_run_json(out, "synth", to_json(a.spec));
  std::cout << "wrote " << scene.sources.size() << " sources and a " << scene.mpi.plane_count()
            << "-plane MPI to " << out.string() << "\n";
  return 0;
}

// --- shared camera/image input ----------------------------------------------

struct SourceArgs {
  std::vector<std::string> images;
  std::string cameras;
  std::vector<int> frames;  // camera line per image; default 0..n-1
  int reference_index = 0;  // index into images
  int width = 0;            // 0: size of the reference image
  int height = 0;
  int planes = 32;
  double d_min = 0.0;
  double d_max = 1.0;
};

void add_sources(CLI::App& app, SourceArgs& a) {
  app.add_option("--images", a.images, "source images (PNG)")->required();
  app.add_option("--cameras", a.cameras, "trajectory file, one line per frame")->required();
  app.add_option("--frames", a.frames, "camera line index for each image");
  app.add_option("--reference-index", a.reference_index, "which image is the reference view");
  app.add_option("--width", a.width, "output width (default: reference image width)");
  app.add_option("--height", a.height, "output height (default: reference image height)");
  app.add_option("--planes", a.planes);
  app.add_option("--d-min", a.d_min);
  app.add_option("--d-max", a.d_max);
}

json sources_config(const SourceArgs& a) {
  return json{{"images", a.images},         {"cameras", a.cameras},
              {"frames", a.frames},         {"reference_index", a.reference_index},
              {"width", a.width},           {"height", a.height},
              {"planes", a.planes},         {"d_min", a.d_min},
              {"d_max", a.d_max}};
}

struct LoadedSources {
  std::vector<SourceView> views;
  Camera reference;
  DisparitySampling sampling;
};

LoadedSources load_sources(const SourceArgs& a) {
  if (a.images.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one image");
  std::vector<int> frames = a.frames;
  if (frames.empty()) {
    for (std::size_t i = 0; i < a.images.size(); ++i) frames.push_back(static_cast<int>(i));
  }
  if (frames.size() != a.images.size()) {
    throw Error(ErrorCode::InvalidArgument, "--frames must list one index per image");
  }
  if (a.reference_index < 0 || a.reference_index >= static_cast<int>(a.images.size())) {
    throw Error(ErrorCode::InvalidArgument, "--reference-index out of range");
  }
  LoadedSources out;
  const auto trajectory = read_trajectory(a.cameras, 2, 2);
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    if (frames[i] < 0 || frames[i] >= static_cast<int>(trajectory.size())) {
      throw Error(ErrorCode::InvalidArgument,
                  "frame index " + std::to_string(frames[i]) + " not in camera file");
    }
    SourceView v;
    v.image = read_png(a.images[i]);
    v.camera = trajectory[frames[i]].camera;
    v.camera.intrinsics = v.camera.intrinsics.resized(v.image.width(), v.image.height());
    out.views.push_back(std::move(v));
  }
  const SourceView& ref = out.views[a.reference_index];
  const int w = a.width > 0 ? a.width : ref.image.width();
  const int h = a.height > 0 ? a.height : ref.image.height();
  out.reference = ref.camera;
  out.reference.intrinsics = ref.camera.intrinsics.resized(w, h);
  out.sampling = DisparitySampling(a.d_min, a.d_max, a.planes);
  return out;
}

// --- psv build ---------------------------------------------------------------

struct PsvArgs {
  SourceArgs src;
  std::string out;
};

int cmd_psv(const PsvArgs& a) {
  const LoadedSources in = load_sources(a.src);
  const PlaneSweepVolume psv = build_psv(in.views, in.reference, in.sampling);
  const fs::path out(a.out);
  ensure_dir(out);
  json sources = json::array();
  for (const auto& c : psv.sources) sources.push_back(camera_to_json(c));
  write_json(out / "psv.json",
             json{{"width", psv.width()},
                  {"height", psv.height()},
                  {"num_planes", psv.plane_count()},
                  {"num_sources", psv.source_count()},
                  {"disparities", sample_disparities(psv.sampling)},
                  {"layout", "source-major"},
                  {"files", "psv_<plane>_src<source>.png, 16-bit RGB"},
                  {"reference", camera_to_json(psv.reference)},
                  {"sources", sources}});
  for (int d = 0; d < psv.plane_count(); ++d) {
    for (int j = 0; j < psv.source_count(); ++j) {
      char name[64];
      std::snprintf(name, sizeof name, "psv_%03d_src%02d.png", d, j);
      write_png16(out / name, psv.slice(d, j));
    }
  }
  write_run_json(out, "psv build", sources_config(a.src));
  std::cout << "wrote " << psv.plane_count() << " planes x " << psv.source_count()
            << " sources to " << out.string() << "\n";
  return 0;
}

// --- render / path -----------------------------------------------------------

struct RenderArgs {
  std::string mpi;
  std::vector<double> offset{0.0, 0.0, 0.0};
  std::vector<double> pose;
  std::string cameras;
  int frame = -1;
  double epsilon = 0.0;  // > 0 also writes a disocclusion mask
  std::string out;
};

void add_render_common(CLI::App& app, RenderArgs& a) {
  app.add_option("--mpi", a.mpi, "MPI directory")->required();
  app.add_option("--epsilon", a.epsilon,
                 "if > 0, also write the disocclusion mask at this threshold");
  app.add_option("--out", a.out, "output directory")->required();
}

json render_config(const RenderArgs& a) {
  return json{{"mpi", a.mpi},         {"offset", a.offset}, {"pose", a.pose},
              {"cameras", a.cameras}, {"frame", a.frame},   {"epsilon", a.epsilon}};
}

void write_frame(const fs::path& out, int index, const Mpi& mpi, const Camera& target,
                 double epsilon) {
  const Composite c = composite(mpi, target);
  write_png16(out / frame_name(index, "frame", "png"), c.color);
  json side{{"index", index},
            {"camera", camera_to_json(target)},
            {"plane_count", mpi.plane_count()}};
  if (epsilon > 0.0) {
    const DisocclusionMask m = disocclusion_mask(mpi, target, epsilon);
    write_png8(out / frame_name(index, "mask", "png"), m.mask);
    side["epsilon"] = epsilon;
    side["disoccluded_pixels"] = m.count();
  }
  write_json(out / frame_name(index, "frame", "json"), side);
}

int cmd_render(const RenderArgs& a) {
  const Mpi mpi = load_mpi(a.mpi);
  Camera target = mpi.reference;
  if (!a.cameras.empty()) {
    const auto traj = read_trajectory(a.cameras, mpi.width(), mpi.height());
    if (a.frame < 0 || a.frame >= static_cast<int>(traj.size())) {
      throw Error(ErrorCode::InvalidArgument, "--frame out of range for the camera file");
    }
    target = traj[a.frame].camera;
  } else if (!a.pose.empty()) {
    target.pose = pose_from_values(a.pose);
  } else {
    target = offset_camera(mpi.reference, vec3(a.offset, "--offset"));
  }
  const fs::path out(a.out);
  ensure_dir(out);
  write_frame(out, 0, mpi, target, a.epsilon);
  write_run_json(out, "render", render_config(a));
  std::cout << "wrote " << (out / frame_name(0, "frame", "png")).string() << "\n";
  return 0;
}

struct PathArgs {
  RenderArgs r;
  std::vector<double> end_offset;
  int frames = 10;
};

int cmd_path(const PathArgs& a) {
  const Mpi mpi = load_mpi(a.r.mpi);
  std::vector<Camera> targets;
  if (!a.r.cameras.empty()) {
    for (const auto& f : read_trajectory(a.r.cameras, mpi.width(), mpi.height()))
      targets.push_back(f.camera);
  } else {
    const Eigen::Vector3d end = vec3(a.end_offset, "--end-offset");
    if (a.frames < 1) throw Error(ErrorCode::InvalidArgument, "--frames must be >= 1");
    for (int i = 0; i < a.frames; ++i) {
      const double t = a.frames == 1 ? 1.0 : static_cast<double>(i) / (a.frames - 1);
      targets.push_back(offset_camera(mpi.reference, t * end));
    }
  }
  const fs::path out(a.r.out);
  ensure_dir(out);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    write_frame(out, static_cast<int>(i), mpi, targets[i], a.r.epsilon);
  }
  json cfg = render_config(a.r);
  cfg["end_offset"] = a.end_offset;
  cfg["frames"] = a.frames;
  write_run_json(out, "path", cfg);
  std::cout << "wrote " << targets.size() << " frames to " << out.string() << "\n";
  return 0;
}

// --- limits ------------------------------------------------------------------

struct RangeArgs {
  double dx = 1.0;
  double dd = 0.0;
  int planes = 32;
  double d_max = 1.0;
  std::vector<double> s{0.0};
  std::string out;
};

int cmd_limits_range(const RangeArgs& a) {
  const double dd = a.dd > 0.0 ? a.dd : a.d_max / (a.planes - 1);
  const RenderableRange r = renderable_range(a.dx, dd, a.d_max);
  json rows = json::array();
  for (double s : a.s) {
    json row{{"s", s}};
    if (s > 0.0) {
      row["u_max"] = nullptr;
      row["status"] = "outside the guaranteed region (s > 0)";
    } else {
      row["u_max"] = r.u_max(s);
    }
    rows.push_back(row);
  }
  const json report{{"dx", a.dx}, {"dd", dd}, {"d_max", a.d_max}, {"ranges", rows}};
  std::cout << report.dump(2) << "\n";
  if (!a.out.empty()) {
    const fs::path out(a.out);
    ensure_dir(out);
    write_json(out / "range.json", report);
    write_run_json(out, "limits range",
                   json{{"dx", a.dx}, {"dd", a.dd}, {"planes", a.planes}, {"d_max", a.d_max},
                        {"s", a.s}});
  }
  return 0;
}

struct ValidateArgs {
  int planes = 32;
  int width = 256;
  int height = 256;
  double d_max = 1.0;
  double s = 0.0;
  double band = 1.0;
  std::uint64_t seed = 0;
  double threshold = 30.0;
  double scan_factor = 2.5;
  int steps = 20;
  std::string out;
};

json validate_config(const ValidateArgs& a) {
  return json{{"planes", a.planes},       {"width", a.width},       {"height", a.height},
              {"d_max", a.d_max},         {"s", a.s},               {"band", a.band},
              {"seed", a.seed},           {"threshold", a.threshold},
              {"scan_factor", a.scan_factor}, {"steps", a.steps}};
}

int cmd_limits_validate(const ValidateArgs& a) {
  const AnalysisMpi mpi = worst_case_mpi(a.height, a.width, a.planes, a.d_max, a.band, a.seed);
  EmpiricalRangeOptions opt;
  opt.fidelity_threshold = a.threshold;
  opt.scan_max_factor = a.scan_factor;
  opt.steps_per_prediction = a.steps;
  const EmpiricalRange er = empirical_range(mpi, a.s, opt);

  json curve = json::array();
  std::ostringstream csv;
  csv << "u,psnr_db,bandwidth\n";
  char line[128];
  for (const auto& c : er.report.curve) {
    curve.push_back(json::array({c.u, c.psnr, c.bandwidth}));
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", c.u, c.psnr, c.bandwidth);
    csv << line;
  }
  json report{{"D", a.planes},
              {"dx", mpi.dx},
              {"dd", mpi.dd},
              {"d_max", mpi.d_max},
              {"s", a.s},
              {"predicted_u_max", er.predicted_u_max},
              {"measured_u_star", er.report.onset ? json(*er.report.onset) : json(nullptr)},
              {"status", er.report.onset ? "crossed" : "beyond scan range"},
              {"scan_max", er.scan_max},
              {"resolution", er.report.resolution},
              {"fidelity_threshold_db", a.threshold},
              {"criterion", "PSNR of the D-plane render against an 8x denser tent-interpolated "
                            "oracle; onset is the first u below the threshold"},
              {"curve_columns", {"u", "psnr_db", "bandwidth"}},
              {"curve", curve}};
  const fs::path out(a.out);
  ensure_dir(out);
  write_json(out / "report.json", report);
  write_text(out / "curve.csv", csv.str());
  write_run_json(out, "limits validate", validate_config(a));
  std::cout << "predicted u_max " << er.predicted_u_max << ", measured u* "
            << (er.report.onset ? std::to_string(*er.report.onset) : "beyond scan range")
            << "\n";
  return 0;
}

// --- pipeline run ------------------------------------------------------------

struct PipelineArgs {
  SourceArgs src;
  std::string phi1 = "photo-consistency";
  std::string phi1_mpi;
  double temperature = 10.0;
  int window = 3;
  std::string phi2 = "nearest-donor";
  int search_radius = 16;
  std::string flows;
  std::string alpha_mpi;
  std::vector<double> render_offset;
  std::string out;
};

int cmd_pipeline(const PipelineArgs& a) {
  const LoadedSources in = load_sources(a.src);
  std::unique_ptr<InitialPredictor> phi1;
  if (a.phi1 == "photo-consistency") {
    phi1 = std::make_unique<PhotoConsistencyPredictor>(a.temperature, a.window);
  } else if (a.phi1 == "mpi") {
    if (a.phi1_mpi.empty()) throw Error(ErrorCode::InvalidArgument, "--phi1 mpi needs --phi1-mpi");
    phi1 = std::make_unique<FixedMpiPredictor>(load_mpi(a.phi1_mpi), "external-mpi");
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown --phi1 '" + a.phi1 + "'");
  }
  std::unique_ptr<HiddenPredictor> phi2;
  if (a.phi2 == "nearest-donor") {
    phi2 = std::make_unique<NearestDonorPredictor>(a.search_radius);
  } else if (a.phi2 == "zero-flow") {
    phi2 = std::make_unique<ZeroFlowPredictor>();
  } else if (a.phi2 == "external") {
    if (a.flows.empty() || a.alpha_mpi.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--phi2 external needs --flows and --alpha-mpi");
    }
    HiddenPrediction hp;
    hp.flows = load_flows(a.flows);
    hp.alpha_fin = load_mpi(a.alpha_mpi).alpha;
    phi2 = std::make_unique<FixedHiddenPredictor>(std::move(hp), "external-flows");
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown --phi2 '" + a.phi2 + "'");
  }

  const PipelineResult r = run_two_step(in.views, in.reference, in.sampling, *phi1, *phi2);
  const fs::path out(a.out);
  ensure_dir(out);
  save_mpi(r.initial, out / "initial");
  save_mpi(r.final, out / "final");
  save_flows(r.hidden.flows, out / "flows.bin");
  write_png16(out / "render_reference.png", composite(r.final, r.final.reference).color);
  if (!a.render_offset.empty()) {
    const Camera target = offset_camera(r.final.reference, vec3(a.render_offset, "--render-offset"));
    write_png16(out / "render_initial.png", composite(r.initial, target).color);
    write_png16(out / "render_final.png", composite(r.final, target).color);
    write_png8(out / "mask.png", disocclusion_mask(r.initial, target).mask);
  }
  write_json(out / "pipeline.json", r.provenance);
  json cfg = sources_config(a.src);
  cfg.update(json{{"phi1", a.phi1},
                  {"phi1_mpi", a.phi1_mpi},
                  {"temperature", a.temperature},
                  {"window", a.window},
                  {"phi2", a.phi2},
                  {"search_radius", a.search_radius},
                  {"flows", a.flows},
                  {"alpha_mpi", a.alpha_mpi},
                  {"render_offset", a.render_offset}});
  write_run_json(out, "pipeline run", cfg);
  std::cout << "wrote pipeline outputs to " << out.string() << "\n";
  return 0;
}

// --- metrics eval ------------------------------------------------------------

struct MetricsArgs {
  std::string pred;
  std::string gt;
  std::string mpi;
  std::string cameras;
  double epsilon = 0.075;
  int bins = 64;
  std::string nat_reference = "masked";
  std::string out;
};

std::vector<std::string> frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n.rfind("frame_", 0) == 0 && e.path().extension() == ".png") names.push_back(n);
  }
  std::sort(names.begin(), names.end());
  return names;
}

int cmd_metrics(const MetricsArgs& a) {
  const Mpi mpi = load_mpi(a.mpi);
  MetricParams params;
  params.epsilon = a.epsilon;
  params.bins = a.bins;
  if (a.nat_reference == "masked") {
    params.nat_reference = NatReference::Masked;
  } else if (a.nat_reference == "full") {
    params.nat_reference = NatReference::FullImage;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--nat-reference must be 'masked' or 'full'");
  }
  const auto names = frame_files(a.pred);
  if (names.empty()) throw Error(ErrorCode::InvalidArgument, "no frame_*.png in " + a.pred);
  const auto traj = read_trajectory(a.cameras, mpi.width(), mpi.height());
  if (traj.size() != names.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "camera file has " + std::to_string(traj.size()) + " lines for " +
                    std::to_string(names.size()) + " frames");
  }
  const fs::path out(a.out);
  ensure_dir(out);
  std::ostringstream lines;
  double sum_fov = 0.0, sum_occ = 0.0, sum_nat = 0.0;
  std::size_t n_occ = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Image pred = read_png(fs::path(a.pred) / names[i]);
    const fs::path gt_path = fs::path(a.gt) / names[i];
    if (!fs::exists(gt_path)) throw Error(ErrorCode::Io, "missing ground truth " + gt_path.string());
    const Image gt = read_png(gt_path);
    const MetricReport r = evaluate(pred, gt, mpi, traj[i].camera, params);
    const std::string id = fs::path(names[i]).stem().string();
    json row{{"id", id},
             {"ssim_fov", r.ssim_fov},
             {"ssim_occ", r.ssim_occ ? json(*r.ssim_occ) : json(nullptr)},
             {"nat_occ", r.nat_occ ? json(*r.nat_occ) : json(nullptr)},
             {"occ_pixel_count", r.occ_pixel_count},
             {"fov_pixel_count", r.fov_pixel_count}};
    lines << row.dump() << "\n";
    sum_fov += r.ssim_fov;
    if (r.ssim_occ) {
      sum_occ += *r.ssim_occ;
      sum_nat += *r.nat_occ;
      ++n_occ;
    }
  }
  write_text(out / "metrics.jsonl", lines.str());
  const double n = static_cast<double>(names.size());
  json summary{{"count", names.size()},
               {"occ_defined_count", n_occ},
               {"mean_ssim_fov", sum_fov / n},
               {"mean_ssim_occ", n_occ ? json(sum_occ / n_occ) : json(nullptr)},
               {"mean_nat_occ", n_occ ? json(sum_nat / n_occ) : json(nullptr)},
               {"epsilon", a.epsilon},
               {"bins", a.bins},
               {"nat_reference", a.nat_reference}};
  write_json(out / "summary.json", summary);
  write_run_json(out, "metrics eval",
                 json{{"pred", a.pred}, {"gt", a.gt}, {"mpi", a.mpi}, {"cameras", a.cameras},
                      {"epsilon", a.epsilon}, {"bins", a.bins},
                      {"nat_reference", a.nat_reference}});
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// --- ingest ------------------------------------------------------------------

struct IngestArgs {
  std::string cameras;
  std::string frames;
  int width = 0;
  int height = 0;
  int triplets = 0;
  bool extrapolate = true;
  int max_gap = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_ingest(const IngestArgs& a) {
  const Manifest m =
      ingest(a.cameras, a.frames.empty() ? std::nullopt : std::optional<fs::path>(a.frames),
             a.width > 0 ? std::optional<int>(a.width) : std::nullopt,
             a.height > 0 ? std::optional<int>(a.height) : std::nullopt);
  const fs::path out(a.out);
  ensure_dir(out);
  write_json(out / "manifest.json", to_json(m));
  if (a.triplets > 0) {
    TripletSamplerOptions opt;
    opt.max_gap = a.max_gap;
    opt.extrapolate = a.extrapolate;
    json rows = json::array();
    for (const Triplet& t :
         sample_triplets(static_cast<int>(m.frames.size()), a.triplets, a.seed, opt)) {
      rows.push_back({{"source0", t.source0}, {"source1", t.source1}, {"target", t.target}});
    }
    write_json(out / "triplets.json",
               json{{"extrapolate", a.extrapolate}, {"max_gap", a.max_gap}, {"seed", a.seed},
                    {"triplets", rows}});
  }
  write_run_json(out, "ingest",
                 json{{"cameras", a.cameras}, {"frames", a.frames}, {"width", a.width},
                      {"height", a.height}, {"triplets", a.triplets},
                      {"extrapolate", a.extrapolate}, {"max_gap", a.max_gap}, {"seed", a.seed}});
  std::cout << "manifest with " << m.frames.size() << " frames written to " << out.string()
            << "\n";
  return 0;
}

// Subcommand path named on the command line, for scoping --config keys.
std::vector<std::string> subcommand_path(const std::vector<std::string>& args) {
  std::vector<std::string> path;
  static const std::vector<std::string> top{"synth", "psv",     "render", "path",
                                            "limits", "pipeline", "metrics", "ingest"};
  static const std::vector<std::string> second{"build", "range", "validate", "run", "eval"};
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& s = args[i];
    if (!s.empty() && s[0] == '-') break;
    const auto& pool = path.empty() ? top : second;
    if (std::find(pool.begin(), pool.end(), s) == pool.end()) break;
    path.push_back(s);
  }
  return path;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Multiplane image view-synthesis laboratory"};
  app.name("mpilab");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "JSON file of option values; command-line flags take precedence");
  app.config_formatter(std::make_shared<JsonConfig>(subcommand_path(args)));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  add_synth(*synth_cmd, synth);

  PsvArgs psv;
  auto* psv_cmd = app.add_subcommand("psv", "Plane-sweep volumes");
  psv_cmd->require_subcommand(1);
  auto* psv_build = psv_cmd->add_subcommand("build", "Reproject inputs onto disparity planes");
  add_sources(*psv_build, psv.src);
  psv_build->add_option("--out", psv.out)->required();

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render an MPI at one target camera");
  add_render_common(*render_cmd, render);
  render_cmd->add_option("--offset", render.offset, "target offset in reference camera axes")
      ->expected(3);
  render_cmd->add_option("--pose", render.pose, "target world-to-camera 3x4, row-major")
      ->expected(12);
  render_cmd->add_option("--cameras", render.cameras, "trajectory file holding the target");
  render_cmd->add_option("--frame", render.frame, "line of --cameras to render");

  PathArgs path;
  auto* path_cmd = app.add_subcommand("path", "Render an MPI along a camera path");
  add_render_common(*path_cmd, path.r);
  path_cmd->add_option("--cameras", path.r.cameras, "trajectory file, one frame per line");
  path_cmd->add_option("--end-offset", path.end_offset,
                       "linear path from the reference to this offset")
      ->expected(3);
  path_cmd->add_option("--frames", path.frames, "frames on the linear path");

  RangeArgs range;
  ValidateArgs validate;
  auto* limits_cmd = app.add_subcommand("limits", "Renderable-range analysis");
  limits_cmd->require_subcommand(1);
  auto* range_cmd = limits_cmd->add_subcommand("range", "Closed-form renderable range");
  range_cmd->add_option("--dx", range.dx);
  range_cmd->add_option("--dd", range.dd, "disparity step (default d_max/(planes-1))");
  range_cmd->add_option("--planes", range.planes);
  range_cmd->add_option("--d-max", range.d_max);
  range_cmd->add_option("--s", range.s, "axial offsets to evaluate");
  range_cmd->add_option("--out", range.out);
  auto* validate_cmd = limits_cmd->add_subcommand("validate", "Measure the range empirically");
  validate_cmd->add_option("--planes", validate.planes);
  validate_cmd->add_option("--width", validate.width);
  validate_cmd->add_option("--height", validate.height);
  validate_cmd->add_option("--d-max", validate.d_max);
  validate_cmd->add_option("--s", validate.s);
  validate_cmd->add_option("--band", validate.band, "texture band as a fraction of Nyquist");
  validate_cmd->add_option("--seed", validate.seed);
  validate_cmd->add_option("--threshold", validate.threshold, "fidelity threshold, dB PSNR");
  validate_cmd->add_option("--scan-factor", validate.scan_factor);
  validate_cmd->add_option("--steps", validate.steps, "scan steps per predicted u_max");
  validate_cmd->add_option("--out", validate.out)->required();

  PipelineArgs pipe;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Two-step MPI prediction");
  pipeline_cmd->require_subcommand(1);
  auto* pipeline_run = pipeline_cmd->add_subcommand("run", "Run both stages");
  add_sources(*pipeline_run, pipe.src);
  pipeline_run->add_option("--phi1", pipe.phi1, "photo-consistency | mpi");
  pipeline_run->add_option("--phi1-mpi", pipe.phi1_mpi, "MPI directory for --phi1 mpi");
  pipeline_run->add_option("--temperature", pipe.temperature);
  pipeline_run->add_option("--window", pipe.window);
  pipeline_run->add_option("--phi2", pipe.phi2, "nearest-donor | zero-flow | external");
  pipeline_run->add_option("--search-radius", pipe.search_radius);
  pipeline_run->add_option("--flows", pipe.flows, "flows.bin for --phi2 external");
  pipeline_run->add_option("--alpha-mpi", pipe.alpha_mpi,
                           "MPI directory whose alpha is alpha_fin for --phi2 external");
  pipeline_run->add_option("--render-offset", pipe.render_offset,
                           "also render initial and final MPIs at this offset")
      ->expected(3);
  pipeline_run->add_option("--out", pipe.out)->required();

  MetricsArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Evaluation metrics");
  metrics_cmd->require_subcommand(1);
  auto* metrics_eval = metrics_cmd->add_subcommand("eval", "SSIM_fov, SSIM_occ and NAT_occ");
  metrics_eval->add_option("--pred", metrics.pred, "directory of predicted frame_*.png")
      ->required();
  metrics_eval->add_option("--gt", metrics.gt, "directory of ground-truth frames")->required();
  metrics_eval->add_option("--mpi", metrics.mpi, "initial MPI for masks")->required();
  metrics_eval->add_option("--cameras", metrics.cameras, "target cameras, one per frame")
      ->required();
  metrics_eval->add_option("--epsilon", metrics.epsilon);
  metrics_eval->add_option("--bins", metrics.bins);
  metrics_eval->add_option("--nat-reference", metrics.nat_reference, "masked | full");
  metrics_eval->add_option("--out", metrics.out)->required();

  IngestArgs ing;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a trajectory and its frames");
  ingest_cmd->add_option("--cameras", ing.cameras, "RealEstate10K camera file")->required();
  ingest_cmd->add_option("--frames", ing.frames, "directory of <timestamp>.png frames");
  ingest_cmd->add_option("--width", ing.width);
  ingest_cmd->add_option("--height", ing.height);
  ingest_cmd->add_option("--triplets", ing.triplets, "number of training triplets to sample");
  ingest_cmd->add_flag("--extrapolate,!--no-extrapolate", ing.extrapolate,
                       "targets outside the source interval");
  ingest_cmd->add_option("--max-gap", ing.max_gap);
  ingest_cmd->add_option("--seed", ing.seed);
  ingest_cmd->add_option("--out", ing.out)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (psv_build->parsed()) return cmd_psv(psv);
    if (render_cmd->parsed()) return cmd_render(render);
    if (path_cmd->parsed()) return cmd_path(path);
    if (range_cmd->parsed()) return cmd_limits_range(range);
    if (validate_cmd->parsed()) return cmd_limits_validate(validate);
    if (pipeline_run->parsed()) return cmd_pipeline(pipe);
    if (metrics_eval->parsed()) return cmd_metrics(metrics);
    if (ingest_cmd->parsed()) return cmd_ingest(ing);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (i/o): " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv, argv + argc));
}

}  // namespace mpilab::cli
