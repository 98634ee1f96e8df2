#include "mpilab/camera_file.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpilab/error.hpp"

namespace mpilab {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view token, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument,
                "line " + std::to_string(line_no) + ": not a number: '" +
                    std::string(token) + "'");
  }
  return v;
}

[[noreturn]] void line_error(int line_no, const std::string& msg) {
  throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

std::vector<TrajectoryFrame> parse_trajectory(std::string_view text, int width, int height) {
  std::vector<TrajectoryFrame> frames;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (line_no == 1 && tokens.size() == 1) continue;  // video URL header
    if (tokens.size() != 19) {
      line_error(line_no, "expected 19 fields, found " + std::to_string(tokens.size()));
    }
    std::int64_t timestamp = 0;
    {
      auto [ptr, ec] = std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(),
                                       timestamp);
      if (ec != std::errc() || ptr != tokens[0].data() + tokens[0].size()) {
        line_error(line_no, "timestamp is not an integer");
      }
    }
    double v[18];
    for (int i = 0; i < 18; ++i) v[i] = parse_number(tokens[i + 1], line_no);
    Eigen::Matrix<double, 3, 4> p;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) p(r, c) = v[6 + 4 * r + c];
    Eigen::Matrix3d rot = p.leftCols<3>();
    const double ortho =
        (rot.transpose() * rot - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-4 || rot.determinant() <= 0.0) {
      line_error(line_no, "rotation is not orthonormal (deviation " +
                              std::to_string(ortho) + ")");
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(rot, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rot = svd.matrixU() * svd.matrixV().transpose();
    TrajectoryFrame frame;
    frame.timestamp = timestamp;
    try {
      frame.camera.intrinsics = CameraIntrinsics(v[0], v[1], v[2], v[3], width, height);
      frame.camera.pose = CameraPose(rot, p.col(3));
    } catch (const Error& e) {
      line_error(line_no, e.what());
    }
    frames.push_back(frame);
  }
  return frames;
}

std::vector<TrajectoryFrame> read_trajectory(const std::filesystem::path& path, int width,
                                             int height) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open camera file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_trajectory(ss.str(), width, height);
  } catch (const Error& e) {
    rethrow_with_context(e, path.string());
  }
}

std::string format_trajectory(const std::vector<TrajectoryFrame>& frames) {
  std::string out;
  char buf[64];
  for (const auto& f : frames) {
    out += std::to_string(f.timestamp);
    const auto& k = f.camera.intrinsics;
    for (double v : {k.fx, k.fy, k.cx, k.cy, 0.0, 0.0}) {
      std::snprintf(buf, sizeof buf, " %.12g", v);
      out += buf;
    }
    const auto m = f.camera.pose.matrix();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof buf, " %.12g", m(r, c) == 0.0 ? 0.0 : m(r, c));
        out += buf;
      }
    out += '\n';
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path,
                      const std::vector<TrajectoryFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write camera file " + path.string());
  out << format_trajectory(frames);
}

}  // namespace mpilab
