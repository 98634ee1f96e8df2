#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "mpilab/error.hpp"
#include "mpilab/image_io.hpp"
#include "mpilab/limits.hpp"
#include "mpilab/mpi_io.hpp"
#include "mpilab/render.hpp"
#include "mpilab/scene.hpp"
#include "support.hpp"

using namespace mpilab;
using namespace mpilab::testing;
namespace fs = std::filesystem;

namespace {

ErrorCode load_error(const fs::path& dir) {
  try {
    load_mpi(dir);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("load_mpi did not throw");
  return ErrorCode::Io;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

double mean_ssd(const Image& a, const Image& b, int margin) {
  double sum = 0.0;
  int n = 0;
  for (int y = margin; y < a.height() - margin; ++y)
    for (int x = margin; x < a.width() - margin; ++x) {
      for (int c = 0; c < 3; ++c) sum += std::pow(a.at(x, y, c) - b.at(x, y, c), 2);
      ++n;
    }
  return sum / n;
}

}  // namespace

TEST_CASE("mpi validation") {
  std::mt19937_64 rng(1);
  Mpi m = random_mpi(rng, 6, 5, 3);
  CHECK_NOTHROW(m.validate());
  m.alpha[1].at(2, 2) = 1.5;
  CHECK_THROWS_AS(m.validate(), Error);
  m = random_mpi(rng, 6, 5, 3);
  m.color.pop_back();
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("psv of a source at the reference camera is the input on every plane") {
  std::mt19937_64 rng(2);
  const Camera cam = test_camera(20, 14);
  const std::vector<SourceView> one{{random_image(rng, 20, 14, 3), cam}};
  const PlaneSweepVolume psv = build_psv(one, cam, DisparitySampling(0.1, 1.0, 5));
  REQUIRE(psv.plane_count() == 5);
  for (int d = 0; d < 5; ++d) CHECK(max_abs_diff(psv.slice(d, 0), one[0].image) < 1e-12);

  const std::vector<SourceView> twins{one[0], one[0]};
  const PlaneSweepVolume pair = build_psv(twins, cam, DisparitySampling(0.1, 1.0, 5));
  CHECK(pair.planes[0].channels() == 6);
  for (int d = 0; d < 5; ++d) CHECK(pair.slice(d, 0) == pair.slice(d, 1));
}

TEST_CASE("psv groups agree only at the plane of a single-plane scene") {
  SceneSpec spec;
  spec.kind = SceneKind::SinglePlane;
  // Planes every 0.1 on [0.2, 0.9]; the content plane d = 0.5 moves exactly
  // 64 * 0.125 * 0.5 = 4 px, so its slices agree without interpolation.
  spec.d_min = 0.2;
  spec.d_max = 0.9;
  spec.disparities = {0.5};
  spec.texture = "noise";
  spec.baselines = {0.0, 0.125};
  const SyntheticScene scene = make_scene(spec);
  const PlaneSweepVolume psv = build_psv(scene.sources, scene.mpi.reference, spec.sampling());
  const int truth = scene.content_planes[0];
  REQUIRE(truth == 3);
  const int margin = static_cast<int>(std::ceil(64 * 0.125 * 0.9)) + 1;
  int best = 0;
  std::vector<double> ssd;
  for (int d = 0; d < psv.plane_count(); ++d) {
    ssd.push_back(mean_ssd(psv.slice(d, 0), psv.slice(d, 1), margin));
    if (ssd[d] < ssd[best]) best = d;
  }
  CHECK(best == truth);
  CHECK(ssd[truth] < 1e-20);
  for (int d = 0; d < psv.plane_count(); ++d)
    if (d != truth) CHECK(ssd[d] > 1e-3);
}

TEST_CASE("psv errors name the source and plane") {
  const Camera ref = test_camera(16, 16);
  const Camera bad = offset_camera(ref, {0.0, 0.0, 1.0});
  std::mt19937_64 rng(3);
  const std::vector<SourceView> src{{random_image(rng, 16, 16, 3), bad}};
  CHECK_THROWS_WITH_AS(build_psv(src, ref, DisparitySampling(0.5, 1.0, 2)),
                       doctest::Contains("source 0, plane 1"), Error);
}

TEST_CASE("resample_mpi identity, merge rule and render preservation") {
  std::mt19937_64 rng(4);
  const Mpi m = random_mpi(rng, 12, 10, 4);
  const Mpi same = resample_mpi(m, 12, 10, 4);
  for (int d = 0; d < 4; ++d) {
    CHECK(same.color[d] == m.color[d]);
    CHECK(same.alpha[d] == m.alpha[d]);
  }

  Mpi stack = Mpi::zeros(test_camera(4, 4), DisparitySampling(0.0, 1.0, 4));
  const double colors[4] = {0.1, 0.3, 0.6, 0.9};
  for (int d = 0; d < 4; ++d)
    for (double& v : stack.color[d].data()) v = colors[d];
  for (double& v : stack.alpha[3].data()) v = 1.0;  // nearest plane opaque
  const Mpi merged = resample_mpi(stack, 4, 4, 2);
  CHECK(merged.alpha[1].at(1, 1) == doctest::Approx(1.0));
  CHECK(merged.color[1].at(1, 1, 0) == doctest::Approx(0.9));
  CHECK(merged.alpha[0].at(1, 1) == doctest::Approx(0.0));

  for (int trial = 0; trial < 6; ++trial) {
    const int planes = trial < 3 ? 2 : 5;
    const Mpi coarse = random_mpi(rng, 9, 7, planes, 0.0, 1.0);
    for (int target_d : {planes + 1, 2 * planes, 7, 16}) {
      const Mpi fine = resample_mpi(coarse, 9, 7, target_d);
      CHECK_NOTHROW(fine.validate());
      CHECK(max_abs_diff(composite(fine, fine.reference).color,
                         composite(coarse, coarse.reference).color) < 1e-6);
    }
  }
  CHECK_THROWS_AS(resample_mpi(m, 1, 10, 4), Error);
}

TEST_CASE("mpi save/load round trip") {
  ScratchDir dir("mpi_roundtrip");
  std::mt19937_64 rng(5);
  Mpi m = random_mpi(rng, 13, 9, 5, 0.2, 0.9);
  m.reference.pose.translation = Eigen::Vector3d(0.1, -0.2, 0.3);
  save_mpi(m, dir.path());
  const Mpi back = load_mpi(dir.path());
  REQUIRE(back.plane_count() == 5);
  CHECK(back.sampling == m.sampling);
  CHECK((back.reference.pose.matrix() - m.reference.pose.matrix()).norm() < 1e-15);
  double worst = 0.0;
  for (int d = 0; d < 5; ++d) {
    worst = std::max(worst, max_abs_diff(back.color[d], m.color[d]));
    worst = std::max(worst, max_abs_diff(back.alpha[d], m.alpha[d]));
  }
  CHECK(worst <= 0.5 / 65535.0 + 1e-12);
  const Camera target = offset_camera(m.reference, {0.02, 0.01, 0.0});
  CHECK(psnr_data_range(composite(back, target).color, composite(m, target).color) > 80.0);

  const auto meta = read_json(dir / "mpi.json");
  CHECK(meta["format_version"] == kMpiFormatVersion);
  CHECK(meta["color_space"] == "linear");
  CHECK(meta["alpha"] == "straight");
  CHECK(png_bit_depth(dir / "plane_000.png") == 16);

  // Writing twice gives identical bytes.
  ScratchDir dir2("mpi_roundtrip2");
  save_mpi(m, dir2.path());
  CHECK(read_bytes(dir / "plane_003.png") == read_bytes(dir2 / "plane_003.png"));
  CHECK(read_bytes(dir / "mpi.json") == read_bytes(dir2 / "mpi.json"));
}

TEST_CASE("mpi load error taxonomy") {
  ScratchDir dir("mpi_errors");
  std::mt19937_64 rng(6);
  const Mpi m = random_mpi(rng, 8, 8, 4);
  const fs::path p = dir.path();

  CHECK(load_error(p / "absent") == ErrorCode::MissingMetadata);

  save_mpi(m, p);
  fs::remove(p / "plane_003.png");
  CHECK(load_error(p) == ErrorCode::PlaneCountMismatch);

  save_mpi(m, p);
  auto meta = read_json(p / "mpi.json");
  meta["format_version"] = kMpiFormatVersion + 1;
  write_json(p / "mpi.json", meta);
  CHECK(load_error(p) == ErrorCode::UnsupportedVersion);

  save_mpi(m, p);
  meta = read_json(p / "mpi.json");
  meta.erase("disparities");
  write_json(p / "mpi.json", meta);
  CHECK(load_error(p) == ErrorCode::MissingMetadata);

  save_mpi(m, p);
  meta = read_json(p / "mpi.json");
  meta["disparities"][1] = 0.9;
  write_json(p / "mpi.json", meta);
  CHECK(load_error(p) == ErrorCode::InconsistentMetadata);

  save_mpi(m, p);
  meta = read_json(p / "mpi.json");
  meta["width"] = 9;
  write_json(p / "mpi.json", meta);
  CHECK(load_error(p) == ErrorCode::InconsistentMetadata);

  save_mpi(m, p);
  std::ofstream(p / "mpi.json") << "{ not json";
  CHECK(load_error(p) == ErrorCode::CorruptFile);

  save_mpi(m, p);
  std::ofstream(p / "plane_001.png") << "garbage";
  CHECK(load_error(p) == ErrorCode::CorruptFile);
}
