#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpilab/camera_file.hpp"

namespace mpilab {

struct ManifestFrame {
  int index = 0;
  std::int64_t timestamp = 0;
  std::string image;  // file name relative to the frames directory; empty if none
  Camera camera;
};

struct Manifest {
  std::string camera_file;
  std::string frames_dir;
  int width = 0;
  int height = 0;
  std::vector<ManifestFrame> frames;
};

/// Validates a trajectory file and matches each line to `<timestamp>.png` in
/// `frames_dir`. Image size comes from the first frame unless given. Without
/// a frames directory the size must be given.
Manifest ingest(const std::filesystem::path& camera_file,
                const std::optional<std::filesystem::path>& frames_dir,
                std::optional<int> width = std::nullopt, std::optional<int> height = std::nullopt);

nlohmann::json to_json(const Manifest& m);

struct Triplet {
  int source0 = 0;
  int source1 = 0;
  int target = 0;
};

struct TripletSamplerOptions {
  int max_gap = 10;          // max frame distance between any two members
  bool extrapolate = true;   // target outside [source0, source1]
};

/// Deterministic triplet sampler over frame indices 0..frame_count-1.
/// source0 < source1 always; with `extrapolate` the target lies strictly
/// outside [source0, source1], otherwise any other frame within max_gap of both.
std::vector<Triplet> sample_triplets(int frame_count, int count, std::uint64_t seed,
                                     const TripletSamplerOptions& options = {});

}  // namespace mpilab
