#include "mpilab/dataset.hpp"

#include <algorithm>
#include <random>

#include "mpilab/error.hpp"
#include "mpilab/image_io.hpp"
#include "mpilab/mpi_io.hpp"

namespace mpilab {

namespace fs = std::filesystem;
using nlohmann::json;

Manifest ingest(const fs::path& camera_file, const std::optional<fs::path>& frames_dir,
                std::optional<int> width, std::optional<int> height) {
  Manifest m;
  m.camera_file = camera_file.string();
  if (frames_dir) {
    if (!fs::is_directory(*frames_dir)) {
      throw Error(ErrorCode::Io, "frames directory not found: " + frames_dir->string());
    }
    m.frames_dir = frames_dir->string();
  }
  if (!width || !height) {
    if (!frames_dir) {
      throw Error(ErrorCode::InvalidArgument,
                  "ingest: image size is needed when no frames directory is given");
    }
    // Size from the first frame named by the trajectory.
    const auto probe = read_trajectory(camera_file, 2, 2);
    if (probe.empty()) throw Error(ErrorCode::InvalidArgument, "ingest: empty camera file");
    const fs::path first = *frames_dir / (std::to_string(probe.front().timestamp) + ".png");
    if (!fs::exists(first)) throw Error(ErrorCode::Io, "missing frame " + first.string());
    const Image img = read_png(first);
    width = img.width();
    height = img.height();
  }
  m.width = *width;
  m.height = *height;
  const auto frames = read_trajectory(camera_file, m.width, m.height);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ManifestFrame f;
    f.index = static_cast<int>(i);
    f.timestamp = frames[i].timestamp;
    f.camera = frames[i].camera;
    if (frames_dir) {
      const std::string name = std::to_string(f.timestamp) + ".png";
      if (!fs::exists(*frames_dir / name)) {
        throw Error(ErrorCode::Io, "camera line " + std::to_string(i + 1) +
                                       ": missing frame " + (*frames_dir / name).string());
      }
      f.image = name;
    }
    m.frames.push_back(std::move(f));
  }
  return m;
}

json to_json(const Manifest& m) {
  json frames = json::array();
  for (const auto& f : m.frames) {
    frames.push_back({{"index", f.index},
                      {"timestamp", f.timestamp},
                      {"image", f.image},
                      {"intrinsics", intrinsics_to_json(f.camera.intrinsics)},
                      {"pose", pose_to_json(f.camera.pose)}});
  }
  return json{{"camera_file", m.camera_file}, {"frames_dir", m.frames_dir},
              {"width", m.width},             {"height", m.height},
              {"frame_count", m.frames.size()}, {"frames", frames}};
}

std::vector<Triplet> sample_triplets(int frame_count, int count, std::uint64_t seed,
                                     const TripletSamplerOptions& options) {
  if (options.max_gap < 2) {
    throw Error(ErrorCode::InvalidArgument, "triplet sampler: max_gap must be >= 2");
  }
  const int min_frames = options.extrapolate ? 3 : 2;
  if (frame_count < min_frames) {
    throw Error(ErrorCode::InvalidArgument, "triplet sampler: not enough frames");
  }
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "triplet sampler: count must be >= 0");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  std::vector<Triplet> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Triplet t;
    t.source0 = uniform(0, frame_count - 2);
    t.source1 = std::min(frame_count - 1, t.source0 + uniform(1, options.max_gap - 1));
    const int span = t.source1 - t.source0;
    const int room = options.max_gap - span;  // how far the target may sit outside
    if (options.extrapolate) {
      std::vector<int> candidates;
      for (int k = 1; k <= room; ++k) {
        if (t.source0 - k >= 0) candidates.push_back(t.source0 - k);
        if (t.source1 + k < frame_count) candidates.push_back(t.source1 + k);
      }
      if (candidates.empty()) continue;
      std::sort(candidates.begin(), candidates.end());
      t.target = candidates[uniform(0, static_cast<int>(candidates.size()) - 1)];
    } else {
      const int lo = std::max(0, t.source1 - options.max_gap);
      const int hi = std::min(frame_count - 1, t.source0 + options.max_gap);
      t.target = uniform(lo, hi);
      if (t.target == t.source0 || t.target == t.source1) continue;
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace mpilab
