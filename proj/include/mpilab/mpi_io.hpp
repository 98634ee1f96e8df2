#pragma once

#include <filesystem>

#include <json.hpp>

#include "mpilab/mpi.hpp"

namespace mpilab {

inline constexpr int kMpiFormatVersion = 1;

/// Writes `mpi.json` and `plane_000.png` ... as 16-bit RGBA (straight alpha,
/// linear values, round(v * 65535)). Creates the directory if needed.
void save_mpi(const Mpi& mpi, const std::filesystem::path& directory);

/// Errors: MissingMetadata (no mpi.json or a required field absent),
/// InconsistentMetadata (fields disagree with each other or with plane
/// images), PlaneCountMismatch (plane files on disk != num_planes),
/// UnsupportedVersion, CorruptFile (unparseable JSON or PNG).
Mpi load_mpi(const std::filesystem::path& directory);

nlohmann::json intrinsics_to_json(const CameraIntrinsics& k);
nlohmann::json pose_to_json(const CameraPose& pose);  // 3x4 row-major
nlohmann::json camera_to_json(const Camera& camera);

/// Fields missing from `j` raise MissingMetadata naming `what`.
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j, int width, int height,
                                      const char* what = "intrinsics");
CameraPose pose_from_json(const nlohmann::json& j, const char* what = "pose");
Camera camera_from_json(const nlohmann::json& j);

}  // namespace mpilab
