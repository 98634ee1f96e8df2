#include "mpilab/flow_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mpilab/error.hpp"

namespace mpilab {

static_assert(std::endian::native == std::endian::little,
              "flows.bin I/O assumes a little-endian host");

void save_flows(const FlowVolume& flows, const std::filesystem::path& path) {
  if (flows.flow.empty()) throw Error(ErrorCode::InvalidArgument, "save_flows: empty volume");
  const int w = flows.flow[0].width();
  const int h = flows.flow[0].height();
  const std::array<std::uint32_t, 5> header{kFlowMagic, static_cast<std::uint32_t>(h),
                                            static_cast<std::uint32_t>(w),
                                            static_cast<std::uint32_t>(flows.plane_count()), 2};
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(w) * h * 2 * flows.plane_count());
  for (const Image& f : flows.flow) {
    if (f.width() != w || f.height() != h || f.channels() != 2) {
      throw Error(ErrorCode::InvalidArgument, "save_flows: inconsistent plane shapes");
    }
    for (double v : f.data()) values.push_back(static_cast<float>(v));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(header.data()), sizeof header);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

FlowVolume load_flows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::array<std::uint32_t, 5> header{};
  in.read(reinterpret_cast<char*>(header.data()), sizeof header);
  if (!in || header[0] != kFlowMagic) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": not a flow volume");
  }
  const std::uint32_t h = header[1], w = header[2], d = header[3];
  if (header[4] != 2 || w < 1 || h < 1 || d < 1 || w > 65536 || h > 65536 || d > 65536) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": bad flow header");
  }
  const std::size_t count = static_cast<std::size_t>(w) * h * 2;
  FlowVolume flows;
  std::vector<float> buf(count);
  for (std::uint32_t p = 0; p < d; ++p) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw Error(ErrorCode::CorruptFile, path.string() + ": truncated flow data");
    Image plane(static_cast<int>(w), static_cast<int>(h), 2);
    auto dst = plane.data();
    for (std::size_t i = 0; i < count; ++i) dst[i] = buf[i];
    flows.flow.push_back(std::move(plane));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": trailing bytes after flow data");
  }
  return flows;
}

}  // namespace mpilab
