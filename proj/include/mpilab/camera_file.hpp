#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mpilab/geometry.hpp"

namespace mpilab {

/// One line of a RealEstate10K trajectory file:
/// `timestamp fx fy cx cy 0 0 P00 P01 P02 P03 P10 ... P23`.
struct TrajectoryFrame {
  std::int64_t timestamp = 0;
  Camera camera;
};

/// Parses trajectory text. Image size is not part of the format and is
/// supplied by the caller. An optional first line holding a single token
/// (the video URL in the published files) is skipped. Rotations within 1e-4
/// of orthonormal are re-projected onto SO(3); anything worse is rejected.
/// Errors carry the 1-based line number.
std::vector<TrajectoryFrame> parse_trajectory(std::string_view text, int width, int height);

std::vector<TrajectoryFrame> read_trajectory(const std::filesystem::path& path, int width,
                                             int height);

std::string format_trajectory(const std::vector<TrajectoryFrame>& frames);

void write_trajectory(const std::filesystem::path& path,
                      const std::vector<TrajectoryFrame>& frames);

}  // namespace mpilab
