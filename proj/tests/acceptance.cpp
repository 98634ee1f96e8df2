// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mpilab/camera_file.hpp"
#include "mpilab/estimator.hpp"
#include "mpilab/limits.hpp"
#include "mpilab/metrics.hpp"
#include "mpilab/render.hpp"
#include "mpilab/scene.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace mpilab;
using namespace mpilab::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- 1, 2: renderable range ---------------------------------------------------

constexpr int kRangeSize = 256;
constexpr std::uint64_t kRangeSeed = 7;

EmpiricalRange measure_range(int planes, double s) {
  const AnalysisMpi a = worst_case_mpi(kRangeSize, kRangeSize, planes, 1.0, 1.0, kRangeSeed);
  return empirical_range(a, s);
}

Outcome criterion_linearity() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<int> ds{16, 32, 64, 128};
  std::vector<double> ustar;
  std::ostringstream detail;
  bool pass = true;
  for (int d : ds) {
    const EmpiricalRange r = measure_range(d, 0.0);
    if (!r.report.onset) {
      detail << "D=" << d << " beyond scan; ";
      pass = false;
      ustar.push_back(0.0);
      continue;
    }
    const double u = *r.report.onset;
    ustar.push_back(u);
    const double vs_pred = u / r.predicted_u_max;
    pass = pass && std::abs(vs_pred - 1.0) <= 0.25;
    detail << "D=" << d << " u*=" << fmt("%.2f", u) << " (" << fmt("%.3f", vs_pred)
           << " of dx/dd); ";
  }
  for (std::size_t i = 1; i < ds.size(); ++i) {
    if (ustar[0] <= 0.0) break;
    const double ratio = ustar[i] / ustar[0];
    const double expected = ds[i] / 16.0;
    pass = pass && std::abs(ratio / expected - 1.0) <= 0.25;
    detail << "ratio " << ds[i] << "/16=" << fmt("%.2f", ratio) << "; ";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pass = pass && secs < 300.0;
  detail << fmt("%.1f s", secs);
  return {pass, detail.str()};
}

Outcome criterion_axial() {
  const EmpiricalRange flat = measure_range(32, 0.0);
  const EmpiricalRange back = measure_range(32, -1.0);
  if (!flat.report.onset || !back.report.onset) {
    return {false, "onset beyond scan range"};
  }
  const double growth = *back.report.onset / *flat.report.onset;
  return {std::abs(growth - 2.0) <= 0.6,
          "u*(s=0)=" + fmt("%.2f", *flat.report.onset) + " u*(s=-1)=" +
              fmt("%.2f", *back.report.onset) + " growth " + fmt("%.3f", growth)};
}

// --- 3: Fourier slice vs direct ---------------------------------------------

Outcome criterion_fourier_vs_direct() {
  // D=16 on [0,1] gives dd=1/15, so u = 15n shifts plane k by exactly n*k px.
  double worst_int = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AnalysisMpi a = worst_case_mpi(64, 64, 16, 1.0, 1.0, seed);
    for (const Eigen::Vector2d u : {Eigen::Vector2d(15, 0), Eigen::Vector2d(-30, 15),
                                    Eigen::Vector2d(45, -30)}) {
      const Image f = fourier_slice_render(a, u, 0.0);
      const Image d = direct_projection_render(a, u, 0.0);
      worst_int = std::max(worst_int, max_abs_diff(f, d));
    }
  }
  double worst_psnr = kPsnrCeiling;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> shift(-40.0, 40.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AnalysisMpi a = worst_case_mpi(64, 64, 16, 1.0, 0.2, 100 + seed);
    const Eigen::Vector2d u(shift(rng), shift(rng));
    const Image f = fourier_slice_render(a, u, 0.0);
    const Image d = direct_projection_render(a, u, 0.0);
    worst_psnr = std::min(worst_psnr, psnr_data_range(d, f));
  }
  return {worst_int < 1e-6 && worst_psnr > 45.0,
          "integer max diff " + fmt("%.2e", worst_int) + ", fractional min PSNR " +
              fmt("%.2f dB", worst_psnr)};
}

// --- 4, 5: compositing and transmittance --------------------------------------

Outcome criterion_compositing() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> side(2, 16), depth(2, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Mpi m = random_mpi(rng, side(rng), side(rng), depth(rng));
    worst = std::max(worst, max_abs_diff(composite(m, m.reference).color,
                                         scalar_composite_reference(m)));
  }
  return {worst < 1e-6, "max abs diff " + fmt("%.2e", worst)};
}

Outcome criterion_transmittance() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> side(2, 16), depth(2, 8);
  double worst_sum = 0.0, worst_ref = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Mpi m = random_mpi(rng, side(rng), side(rng), depth(rng));
    const PlaneStack t = transmittance_reference(m);
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) {
        double sum = 0.0, clear = 1.0;
        for (int d = 0; d < m.plane_count(); ++d) {
          sum += t[d].at(x, y);
          clear *= 1.0 - m.alpha[d].at(x, y);
        }
        worst_sum = std::max(worst_sum, std::abs(sum - (1.0 - clear)));
      }
    const VisibleVolume vis = soft_remove_hidden(m);
    Image summed(m.width(), m.height(), 3);
    for (const Image& c : vis.c_vis)
      for (std::size_t i = 0; i < c.data().size(); ++i) summed.data()[i] += c.data()[i];
    worst_ref = std::max(worst_ref, max_abs_diff(summed, composite(m, m.reference).color));
    const PlaneStack r = cumulative_visible_renders(vis);
    worst_ref = std::max(worst_ref, max_abs_diff(r.back(), summed));
  }
  return {worst_sum < 1e-6 && worst_ref < 1e-6,
          "sum identity " + fmt("%.2e", worst_sum) + ", reference preservation " +
              fmt("%.2e", worst_ref)};
}

// --- 6, 7: synthetic two-layer scenes ----------------------------------------

SceneSpec two_layer_spec(double baseline) {
  SceneSpec s;
  s.kind = SceneKind::TwoLayer;
  s.width = 64;
  s.height = 64;
  s.planes = 8;
  s.d_min = 0.25;
  s.d_max = 1.0;
  s.disparities = {0.25, 1.0};
  s.occluder = Rect{20, 16, 40, 48};
  s.baselines = {0.0, baseline};
  return s;
}

Outcome criterion_disocclusion() {
  std::ostringstream detail;
  bool pass = true;
  for (double b : {0.04, 0.08, 0.12, 0.16, 0.20}) {
    const SceneSpec spec = two_layer_spec(0.05);
    const SyntheticScene scene = make_scene(spec);
    const Camera target = offset_camera(scene.mpi.reference, {b, 0.0, 0.0});
    const double area = static_cast<double>(disocclusion_mask(scene.mpi, target).count());
    const BandGeometry band = two_layer_band(spec, b);
    // 5% of the band plus two pixel columns along its height.
    const double tol = 0.05 * band.area_px + 2.0 * band.height_px;
    pass = pass && std::abs(area - band.area_px) <= tol;
    detail << "b=" << b << " " << area << "/" << band.area_px << " px; ";
  }
  return {pass, detail.str()};
}

// The initial MPI a repeated-texture model would produce: the hidden
// background behind the occluder carries the foreground texture.
Mpi repeated_texture_initial(const SyntheticScene& scene) {
  Mpi m = scene.mpi;
  const int bg = scene.content_planes[0];
  const int fg = scene.content_planes[1];
  const Rect r = scene.spec.occluder;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      for (int c = 0; c < 3; ++c) m.color[bg].at(x, y, c) = m.color[fg].at(x, y, c);
  return m;
}

Outcome criterion_pipeline() {
  const SceneSpec spec = two_layer_spec(0.05);
  const SyntheticScene scene = make_scene(spec);
  const Camera target = offset_camera(scene.mpi.reference, {0.15, 0.0, 0.0});
  const Image gt = composite(scene.mpi, target).color;

  const FixedMpiPredictor truth(scene.mpi, "ground-truth");
  const PipelineResult donor = run_two_step(scene.sources, scene.mpi.reference,
                                            scene.spec.sampling(), truth,
                                            NearestDonorPredictor());
  const PipelineResult zero = run_two_step(scene.sources, scene.mpi.reference,
                                           scene.spec.sampling(), truth, ZeroFlowPredictor());
  const Mpi repeated = repeated_texture_initial(scene);

  auto score = [&](const Mpi& m) {
    return ssim_occ(composite(m, target).color, gt, scene.mpi, target);
  };
  const OccScore s_fin = score(donor.final);
  const OccScore s_zero = score(zero.final);
  const OccScore s_rep = score(repeated);
  if (!s_fin.value || !s_zero.value || !s_rep.value) return {false, "empty disocclusion"};
  const bool pass = *s_fin.value >= 0.8 && *s_fin.value > *s_zero.value &&
                    *s_fin.value > *s_rep.value;
  return {pass, "SSIM_occ nearest-donor " + fmt("%.4f", *s_fin.value) + ", zero-flow " +
                    fmt("%.4f", *s_zero.value) + ", repeated-texture init " +
                    fmt("%.4f", *s_rep.value) + " over " + std::to_string(s_fin.count) +
                    " px"};
}

// --- 8: metrics ----------------------------------------------------------------

// scikit-image structural_similarity (gaussian_weights, sigma 1.5, population
// covariance, data_range 1) on ssim_pair(0..19); see tools/oracles.
constexpr double kSkimageSsim[20] = {
    1.000000000000, 0.987442410457, 0.958462449561, 0.915727827681, 0.840271959502,
    0.729463574977, 0.677751779317, 0.643978376454, 0.494385248725, 0.511192663365,
    0.399348816506, 0.355335935851, 0.275054696548, 0.276698650113, 0.261654078275,
    0.200435883925, 0.149030235140, 0.144136010893, 0.133690265186, 0.113998359622};

double interior_mean(const Image& map, int border) {
  double sum = 0.0;
  int n = 0;
  for (int y = border; y < map.height() - border; ++y)
    for (int x = border; x < map.width() - border; ++x) {
      sum += map.at(x, y);
      ++n;
    }
  return sum / n;
}

Outcome criterion_metrics() {
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const SsimPair p = ssim_pair(k);
    worst = std::max(worst, std::abs(interior_mean(ssim_map(p.a, p.b), 5) - kSkimageSsim[k]));
  }
  const double bin = std::sqrt(2.0) / 2.0;
  const double two_bin = nat_from_distance(wasserstein1({1.0, 0.0}, {0.0, 1.0}, bin));
  std::mt19937_64 rng(8);
  const Image img = random_image(rng, 16, 16, 3);
  const double clamp = nat_occ(img, img, Image(16, 16, 1, 1.0));
  const bool nat_ok = std::abs(two_bin - 0.3466) < 1e-4 && std::abs(clamp - 13.8155) < 1e-4;
  return {worst < 1e-3 && nat_ok, "SSIM max diff " + fmt("%.2e", worst) + ", NAT two-bin " +
                                      fmt("%.5f", two_bin) + ", clamp " + fmt("%.5f", clamp)};
}

// --- 9: photo-consistency ----------------------------------------------------

Outcome criterion_photo_consistency() {
  SceneSpec spec;
  spec.kind = SceneKind::SinglePlane;
  spec.width = 64;
  spec.height = 64;
  spec.planes = 8;
  spec.d_min = 0.25;
  spec.d_max = 1.0;
  spec.disparities = {0.5};
  spec.texture = "noise";
  spec.baselines = {0.0, 0.1};
  const SyntheticScene scene = make_scene(spec);
  const PlaneSweepVolume psv =
      build_psv(scene.sources, scene.mpi.reference, scene.spec.sampling());
  const Mpi m = PhotoConsistencyPredictor().predict(psv);
  const int truth = scene.content_planes[0];
  // Largest plane shift is fx*W*b*d_max px; skip it plus the cost window.
  const int margin = static_cast<int>(std::ceil(spec.fx * spec.width * 0.1 * spec.d_max)) + 2;
  int hits = 0, total = 0;
  for (int y = margin; y < spec.height - margin; ++y)
    for (int x = margin; x < spec.width - margin; ++x) {
      int best = 0;
      for (int d = 1; d < m.plane_count(); ++d)
        if (m.alpha[d].at(x, y) > m.alpha[best].at(x, y)) best = d;
      hits += best == truth;
      ++total;
    }
  const double frac = static_cast<double>(hits) / total;
  return {frac >= 0.99, fmt("%.4f", frac) + " of " + std::to_string(total) +
                            " interior pixels at the true plane"};
}

// --- 10: CLI reproducibility -------------------------------------------------

int cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{"mpilab"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int rc = cli::run(argv);
  std::cout.rdbuf(old);
  return rc;
}

// Runs every subcommand under `root` and returns the exit codes.
std::map<std::string, int> run_all_commands(const fs::path& root) {
  const std::string r = root.string();
  std::map<std::string, int> rc;
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "synth.json");
    cfg << R"({"kind": "two-layer", "seed": 3, "baselines": [0.0, 0.05], "out": ")"
        << r + "/synth" << "\"}";
  }
  rc["synth"] = cli({"synth", "--config", r + "/synth.json"});
  const std::string s0 = r + "/synth/source_00.png", s1 = r + "/synth/source_01.png";
  const std::string cams = r + "/synth/cameras.txt";
  rc["psv build"] = cli({"psv", "build", "--images", s0, s1, "--cameras", cams, "--planes", "8",
                         "--d-min", "0.25", "--d-max", "1", "--out", r + "/psv"});
  rc["render"] = cli({"render", "--mpi", r + "/synth/mpi", "--offset", "0.1", "0", "0",
                      "--epsilon", "0.075", "--out", r + "/render"});

  std::vector<TrajectoryFrame> targets;
  const Camera ref = make_scene(SceneSpec{}).mpi.reference;
  for (int i = 0; i < 5; ++i) {
    targets.push_back({i, offset_camera(ref, {0.03 * i, 0.0, 0.0})});
  }
  write_trajectory(root / "targets.txt", targets);
  rc["path"] = cli({"path", "--mpi", r + "/synth/mpi", "--cameras", r + "/targets.txt",
                    "--out", r + "/gt"});
  rc["limits range"] =
      cli({"limits", "range", "--planes", "32", "--s", "0", "-1", "--out", r + "/range"});
  rc["limits validate"] = cli({"limits", "validate", "--planes", "8", "--width", "64",
                               "--height", "64", "--out", r + "/validate"});
  rc["pipeline run"] = cli({"pipeline", "run", "--images", s0, s1, "--cameras", cams,
                            "--planes", "8", "--d-min", "0.25", "--d-max", "1",
                            "--render-offset", "0.1", "0", "0", "--out", r + "/pipeline"});
  cli({"path", "--mpi", r + "/pipeline/final", "--cameras", r + "/targets.txt", "--out",
       r + "/pred"});
  rc["metrics eval"] = cli({"metrics", "eval", "--pred", r + "/pred", "--gt", r + "/gt",
                            "--mpi", r + "/pipeline/initial", "--cameras", r + "/targets.txt",
                            "--out", r + "/metrics"});
  fs::create_directories(root / "frames");
  for (int i = 0; i < 5; ++i) {
    fs::copy_file(root / "gt" / ("frame_0000" + std::to_string(i) + ".png"),
                  root / "frames" / (std::to_string(i) + ".png"));
  }
  rc["ingest"] = cli({"ingest", "--cameras", r + "/targets.txt", "--frames", r + "/frames",
                      "--triplets", "4", "--max-gap", "4", "--out", r + "/ingest"});
  return rc;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_bytes(e.path());
  }
  return files;
}

Outcome criterion_reproducibility() {
  const fs::path root = fs::temp_directory_path() / "mpilab_acceptance_repro";
  fs::remove_all(root);
  const auto rc1 = run_all_commands(root);
  const auto first = snapshot(root);
  fs::remove_all(root);
  const auto rc2 = run_all_commands(root);
  const auto second = snapshot(root);
  fs::remove_all(root);

  std::ostringstream detail;
  bool pass = true;
  for (const auto& [cmd, code] : rc1) {
    if (code != 0 || rc2.at(cmd) != 0) {
      pass = false;
      detail << cmd << " exited " << code << "; ";
    }
  }
  int differing = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      if (differing++ < 3) detail << name << " differs; ";
    }
  }
  pass = pass && differing == 0 && first.size() == second.size();
  detail << rc1.size() << " commands, " << first.size() << " files compared";
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 renderable-range linearity", criterion_linearity},
      {"2 axial broadening", criterion_axial},
      {"3 fourier slice vs direct render", criterion_fourier_vs_direct},
      {"4 compositing oracle", criterion_compositing},
      {"5 transmittance identities", criterion_transmittance},
      {"6 disocclusion mask geometry", criterion_disocclusion},
      {"7 two-step pipeline on synthetic scene", criterion_pipeline},
      {"8 metric correctness", criterion_metrics},
      {"9 photo-consistency sanity", criterion_photo_consistency},
      {"10 CLI reproducibility", criterion_reproducibility},
  };
  // Optional filter: run only criteria whose number is listed.
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const std::string number = name.substr(0, name.find(' '));
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
