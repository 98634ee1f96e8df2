#pragma once

#include <cstdint>
#include <filesystem>

#include "mpilab/render.hpp"

namespace mpilab {

/// "MPFL" read as a little-endian uint32.
inline constexpr std::uint32_t kFlowMagic = 0x4c46504d;

/// flows.bin: little-endian header {magic, H, W, D, 2} as uint32, then
/// float32 values in (d, y, x, component) order.
void save_flows(const FlowVolume& flows, const std::filesystem::path& path);
FlowVolume load_flows(const std::filesystem::path& path);

}  // namespace mpilab
