#include "mpilab/mpi_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "mpilab/error.hpp"
#include "mpilab/image_io.hpp"

namespace mpilab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string plane_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "plane_%03d.png", index);
  return buf;
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::MissingMetadata, where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

double require_number(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::InconsistentMetadata,
                where + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

int require_int(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::InconsistentMetadata,
                where + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

json intrinsics_to_json(const CameraIntrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

json pose_to_json(const CameraPose& pose) {
  const auto m = pose.matrix();
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json camera_to_json(const Camera& camera) {
  json j = intrinsics_to_json(camera.intrinsics);
  j["width"] = camera.width();
  j["height"] = camera.height();
  j["pose"] = pose_to_json(camera.pose);
  return j;
}

CameraIntrinsics intrinsics_from_json(const json& j, int width, int height, const char* what) {
  const std::string where(what);
  CameraIntrinsics k(require_number(j, "fx", where), require_number(j, "fy", where),
                     require_number(j, "cx", where), require_number(j, "cy", where), width,
                     height);
  return k;
}

CameraPose pose_from_json(const json& j, const char* what) {
  const std::string where(what);
  // Accept either 3 rows of 4 or a flat row-major list of 12.
  std::vector<double> flat;
  if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != 4) {
        throw Error(ErrorCode::InconsistentMetadata, where + ": expected a 3x4 matrix");
      }
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
  } else if (j.is_array() && j.size() == 12) {
    for (const auto& v : j) flat.push_back(v.get<double>());
  } else {
    throw Error(ErrorCode::InconsistentMetadata, where + ": expected a 3x4 matrix");
  }
  Eigen::Matrix<double, 3, 4> m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = flat[4 * r + c];
  return CameraPose::from_matrix(m);
}

Camera camera_from_json(const json& j) {
  const int w = require_int(j, "width", "camera");
  const int h = require_int(j, "height", "camera");
  Camera cam;
  cam.intrinsics = intrinsics_from_json(j, w, h, "camera");
  cam.intrinsics.validate();
  cam.pose = j.contains("pose") ? pose_from_json(j.at("pose"), "camera.pose") : CameraPose();
  return cam;
}

void save_mpi(const Mpi& mpi, const fs::path& directory) {
  mpi.validate("save_mpi");
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + directory.string());

  json meta;
  meta["format_version"] = kMpiFormatVersion;
  meta["width"] = mpi.width();
  meta["height"] = mpi.height();
  meta["num_planes"] = mpi.plane_count();
  meta["disparities"] = sample_disparities(mpi.sampling);
  meta["reference_intrinsics"] = intrinsics_to_json(mpi.reference.intrinsics);
  meta["reference_pose"] = pose_to_json(mpi.reference.pose);
  meta["color_space"] = "linear";
  meta["alpha"] = "straight";

  std::ofstream out(directory / "mpi.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (directory / "mpi.json").string());
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed: " + (directory / "mpi.json").string());

  for (int d = 0; d < mpi.plane_count(); ++d) {
    Image rgba(mpi.width(), mpi.height(), 4);
    for (int y = 0; y < mpi.height(); ++y) {
      for (int x = 0; x < mpi.width(); ++x) {
        for (int c = 0; c < 3; ++c) rgba.at(x, y, c) = mpi.color[d].at(x, y, c);
        rgba.at(x, y, 3) = mpi.alpha[d].at(x, y);
      }
    }
    write_png16(directory / plane_name(d), rgba);
  }
}

Mpi load_mpi(const fs::path& directory) {
  const fs::path meta_path = directory / "mpi.json";
  if (!fs::exists(meta_path)) {
    throw Error(ErrorCode::MissingMetadata, "no mpi.json in " + directory.string());
  }
  json meta;
  {
    std::ifstream in(meta_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + meta_path.string());
    try {
      meta = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptFile, meta_path.string() + ": " + e.what());
    }
  }
  const std::string where = meta_path.string();

  const int version = require_int(meta, "format_version", where);
  if (version > kMpiFormatVersion || version < 1) {
    throw Error(ErrorCode::UnsupportedVersion,
                where + ": format_version " + std::to_string(version) +
                    " is not supported (this build reads version " +
                    std::to_string(kMpiFormatVersion) + ")");
  }
  const int width = require_int(meta, "width", where);
  const int height = require_int(meta, "height", where);
  const int num_planes = require_int(meta, "num_planes", where);
  const json& disp = require(meta, "disparities", where);
  const json& intr = require(meta, "reference_intrinsics", where);
  const json& pose = require(meta, "reference_pose", where);
  const std::string color_space = require(meta, "color_space", where).get<std::string>();
  const std::string alpha_mode = require(meta, "alpha", where).get<std::string>();

  if (color_space != "linear" || alpha_mode != "straight") {
    throw Error(ErrorCode::InconsistentMetadata,
                where + ": expected color_space 'linear' and alpha 'straight'");
  }
  if (width < 2 || height < 2 || num_planes < 2) {
    throw Error(ErrorCode::InconsistentMetadata, where + ": dimensions must be >= 2");
  }
  if (!disp.is_array() || static_cast<int>(disp.size()) != num_planes) {
    throw Error(ErrorCode::InconsistentMetadata,
                where + ": disparities has " + std::to_string(disp.size()) +
                    " entries but num_planes is " + std::to_string(num_planes));
  }
  std::vector<double> disparities;
  for (const auto& v : disp) disparities.push_back(v.get<double>());
  DisparitySampling sampling;
  try {
    sampling = DisparitySampling(disparities.front(), disparities.back(), num_planes);
  } catch (const Error& e) {
    throw Error(ErrorCode::InconsistentMetadata, where + ": " + e.what());
  }
  for (int i = 0; i < num_planes; ++i) {
    if (std::abs(disparities[i] - sampling.disparity(i)) > 1e-9 * (1.0 + sampling.d_max)) {
      throw Error(ErrorCode::InconsistentMetadata,
                  where + ": disparities are not uniformly spaced and ascending");
    }
  }

  Camera reference;
  try {
    reference.intrinsics = intrinsics_from_json(intr, width, height, "reference_intrinsics");
    reference.intrinsics.validate();
    reference.pose = pose_from_json(pose, "reference_pose");
    reference.pose.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingMetadata) throw;
    throw Error(ErrorCode::InconsistentMetadata, where + ": " + e.what());
  }

  // Count plane files actually present so an extra or missing file is caught.
  static const std::regex kPlaneRe(R"(plane_\d{3,}\.png)");
  int on_disk = 0;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (std::regex_match(entry.path().filename().string(), kPlaneRe)) ++on_disk;
  }
  bool all_named = true;
  for (int d = 0; d < num_planes; ++d) {
    if (!fs::exists(directory / plane_name(d))) all_named = false;
  }
  if (on_disk != num_planes || !all_named) {
    throw Error(ErrorCode::PlaneCountMismatch,
                where + ": num_planes is " + std::to_string(num_planes) + " but found " +
                    std::to_string(on_disk) + " plane files");
  }

  Mpi mpi;
  mpi.reference = reference;
  mpi.sampling = sampling;
  for (int d = 0; d < num_planes; ++d) {
    const fs::path p = directory / plane_name(d);
    Image rgba = read_png(p);
    if (rgba.width() != width || rgba.height() != height || rgba.channels() != 4) {
      throw Error(ErrorCode::InconsistentMetadata,
                  p.string() + ": expected " + std::to_string(width) + "x" +
                      std::to_string(height) + " RGBA");
    }
    mpi.color.push_back(Image(width, height, 3));
    mpi.alpha.push_back(Image(width, height, 1));
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        for (int c = 0; c < 3; ++c) mpi.color.back().at(x, y, c) = rgba.at(x, y, c);
        mpi.alpha.back().at(x, y) = rgba.at(x, y, 3);
      }
    }
  }
  return mpi;
}

}  // namespace mpilab
