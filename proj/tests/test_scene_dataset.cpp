#include <doctest.h>

#include <fstream>
#include <set>

#include "mpilab/dataset.hpp"
#include "mpilab/error.hpp"
#include "mpilab/image_io.hpp"
#include "mpilab/render.hpp"
#include "mpilab/scene.hpp"
#include "support.hpp"

using namespace mpilab;
using namespace mpilab::testing;
namespace fs = std::filesystem;

namespace {

std::vector<TrajectoryFrame> walk(int n) {
  std::vector<TrajectoryFrame> frames;
  const Camera start = test_camera(16, 12, 0.8, 1.1);
  for (int i = 0; i < n; ++i)
    frames.push_back({1000 + 33 * i, offset_camera(start, {0.01 * i, 0.0, -0.02 * i})});
  return frames;
}

void write_frames(const fs::path& dir, const std::vector<TrajectoryFrame>& frames) {
  fs::create_directories(dir);
  for (const auto& f : frames)
    write_png8(dir / (std::to_string(f.timestamp) + ".png"), Image(16, 12, 3, 0.25));
}

}  // namespace

TEST_CASE("scene spec validation and JSON round trip") {
  SceneSpec spec;
  CHECK_NOTHROW(spec.validate());
  SceneSpec bad = spec;
  bad.occluder = Rect{50, 10, 70, 20};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.baselines.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.texture = "plaid";
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.disparities = {0.5, 0.51};  // both snap to plane 2
  CHECK_THROWS_AS(make_scene(bad), Error);

  spec.kind = SceneKind::MultiLayer;
  spec.disparities = {0.3, 0.6, 0.9};
  spec.seed = 77;
  const SceneSpec back = scene_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  CHECK(scene_spec_from_json(nlohmann::json::object()).width == 64);
  CHECK_THROWS_AS(scene_kind_from_string("cube"), Error);
}

TEST_CASE("single-plane scene") {
  SceneSpec spec;
  spec.kind = SceneKind::SinglePlane;
  spec.disparities = {0.6};
  spec.baselines = {0.0, 0.0, 0.05};
  const SyntheticScene s = make_scene(spec);
  REQUIRE(s.content_planes.size() == 1);
  for (int d = 0; d < s.mpi.plane_count(); ++d)
    for (double v : s.mpi.alpha[d].data()) CHECK(v == (d == s.content_planes[0] ? 1.0 : 0.0));
  // Zero baselines render the reference view.
  CHECK(s.sources[0].image == s.sources[1].image);
  CHECK(max_abs_diff(s.sources[0].image, s.mpi.color[s.content_planes[0]]) < 1e-12);
  CHECK_FALSE(s.sources[2].image == s.sources[0].image);
}

TEST_CASE("two-layer band geometry") {
  SceneSpec spec;
  spec.disparities = {0.25, 1.0};
  spec.occluder = Rect{20, 16, 40, 48};
  spec.baselines = {0.0, 0.1, -0.05};
  const SyntheticScene s = make_scene(spec);
  const auto& bands = s.geometry["disocclusion_bands"];
  REQUIRE(bands.size() == 3);
  CHECK(bands[0]["band_area_px"] == 0.0);
  CHECK(bands[1]["band_width_px"].get<double>() == doctest::Approx(64 * 0.1 * 0.75));
  CHECK(bands[1]["band_height_px"] == 32.0);
  CHECK(bands[1]["side"] == "right");
  CHECK(bands[2]["side"] == "left");
  CHECK(bands[2]["band_area_px"].get<double>() == doctest::Approx(64 * 0.05 * 0.75 * 32));
  CHECK(s.geometry["content_disparities"][1] == 1.0);
}

TEST_CASE("worst-case noise layers share transmittance equally") {
  SceneSpec spec;
  spec.kind = SceneKind::WorstCaseNoise;
  spec.width = spec.height = 16;
  spec.planes = 24;
  const SyntheticScene s = make_scene(spec);
  REQUIRE(s.content_planes.size() == 3);
  const PlaneStack t = transmittance_reference(s.mpi);
  for (int p : s.content_planes)
    for (double v : t[p].data()) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("ingest matches trajectory lines to frames") {
  ScratchDir dir("ingest");
  const auto frames = walk(5);
  write_trajectory(dir / "cams.txt", frames);
  write_frames(dir / "frames", frames);

  const Manifest m = ingest(dir / "cams.txt", dir / "frames");
  CHECK(m.width == 16);
  CHECK(m.height == 12);
  REQUIRE(m.frames.size() == 5);
  CHECK(m.frames[3].timestamp == 1099);
  CHECK(m.frames[3].image == "1099.png");
  CHECK((m.frames[3].camera.pose.matrix() - frames[3].camera.pose.matrix()).norm() < 1e-9);
  CHECK(to_json(m)["frame_count"] == 5);

  const Manifest sized = ingest(dir / "cams.txt", std::nullopt, 32, 24);
  CHECK(sized.frames[0].image.empty());
  CHECK(sized.frames[0].camera.intrinsics.width == 32);
  CHECK_THROWS_AS(ingest(dir / "cams.txt", std::nullopt), Error);

  fs::remove(dir / "frames" / "1066.png");
  try {
    ingest(dir / "cams.txt", dir / "frames");
    FAIL("expected a missing frame");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::ofstream(dir / "short.txt") << "1000 0.8 1.1 0.5 0.5 0 0 1 0 0 0 0 1 0 0 0 0 1\n";
  CHECK_THROWS_WITH_AS(ingest(dir / "short.txt", std::nullopt, 16, 12),
                       doctest::Contains("line 1"), Error);
}

TEST_CASE("triplet sampler") {
  const TripletSamplerOptions opts{6, true};
  const auto t = sample_triplets(40, 500, 9, opts);
  REQUIRE(t.size() == 500);
  std::set<int> gaps;
  for (const Triplet& x : t) {
    CHECK(x.source0 < x.source1);
    CHECK((x.target < x.source0 || x.target > x.source1));
    const int lo = std::min(x.source0, x.target), hi = std::max(x.source1, x.target);
    CHECK(hi - lo <= 6);
    CHECK(lo >= 0);
    CHECK(hi < 40);
    gaps.insert(x.source1 - x.source0);
  }
  CHECK(gaps.size() > 1);

  const auto inner = sample_triplets(12, 300, 10, {4, false});
  for (const Triplet& x : inner) {
    CHECK(x.target != x.source0);
    CHECK(x.target != x.source1);
    CHECK(std::abs(x.target - x.source0) <= 4);
    CHECK(std::abs(x.target - x.source1) <= 4);
  }

  const auto again = sample_triplets(40, 500, 9, opts);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(again[i].source0 == t[i].source0);
    CHECK(again[i].target == t[i].target);
  }
  CHECK(sample_triplets(40, 0, 9).empty());
  CHECK_THROWS_AS(sample_triplets(2, 5, 1), Error);
  CHECK_THROWS_AS(sample_triplets(40, 5, 1, {1, true}), Error);
}
