#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "mpilab/mpi.hpp"

namespace mpilab::testing {

inline Camera test_camera(int w, int h, double fx = 1.0, double fy = 1.0) {
  Camera c;
  c.intrinsics = CameraIntrinsics(fx, fy, 0.5, 0.5, w, h);
  return c;
}

inline Image random_image(std::mt19937_64& rng, int w, int h, int channels, double lo = 0.0,
                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(w, h, channels);
  for (double& v : img.data()) v = u(rng);
  return img;
}

inline Mpi random_mpi(std::mt19937_64& rng, int w, int h, int planes, double d_min = 0.1,
                      double d_max = 1.0) {
  Mpi m = Mpi::zeros(test_camera(w, h), DisparitySampling(d_min, d_max, planes));
  for (int d = 0; d < planes; ++d) {
    m.color[d] = random_image(rng, w, h, 3);
    m.alpha[d] = random_image(rng, w, h, 1);
  }
  return m;
}

// Per-pixel over operator written independently of the library: walk the
// planes front to back and accumulate with the running transmittance.
inline double scalar_over(const std::vector<double>& color, const std::vector<double>& alpha) {
  double out = 0.0;
  double through = 1.0;
  for (int d = static_cast<int>(color.size()) - 1; d >= 0; --d) {
    out += through * alpha[d] * color[d];
    through *= 1.0 - alpha[d];
  }
  return out;
}

inline Image scalar_composite_reference(const Mpi& m) {
  Image out(m.width(), m.height(), 3);
  std::vector<double> c(m.plane_count()), a(m.plane_count());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      for (int ch = 0; ch < 3; ++ch) {
        for (int d = 0; d < m.plane_count(); ++d) {
          c[d] = m.color[d].at(x, y, ch);
          a[d] = m.alpha[d].at(x, y);
        }
        out.at(x, y, ch) = scalar_over(c, a);
      }
  return out;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("mpilab_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// splitmix64 finalizer; the SSIM reference script reproduces these pairs bit
// for bit, so it must stay in sync with tools/oracles/ssim_reference.py.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double hash_unit(std::uint64_t pair, std::uint64_t stream, int x, int y, int c) {
  const std::uint64_t key = (pair << 48) ^ (stream << 40) ^ (static_cast<std::uint64_t>(y) << 20) ^
                            (static_cast<std::uint64_t>(x) << 4) ^ static_cast<std::uint64_t>(c);
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

struct SsimPair {
  Image a;
  Image b;
};

// Pair k: 40x32, gray for even k and RGB for odd k. `a` is a sinusoid plus
// noise; `b` mixes in fresh noise and a gain/offset that grow with k.
inline SsimPair ssim_pair(int k) {
  const int w = 40, h = 32, ch = (k % 2 == 0) ? 1 : 3;
  SsimPair p{Image(w, h, ch), Image(w, h, ch)};
  const double fx = 0.15 + 0.05 * (k % 5);
  const double fy = 0.10 + 0.04 * (k % 4);
  const double mix = 0.04 * k;
  const double gain = 1.0 - 0.02 * k;
  const double offset = 0.01 * (k % 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        const double base = 0.5 + 0.3 * std::sin(fx * x + 0.7 * c + k) * std::cos(fy * y) +
                            0.2 * (hash_unit(k, 0, x, y, c) - 0.5);
        const double other = hash_unit(k, 1, x, y, c);
        p.a.at(x, y, c) = base;
        p.b.at(x, y, c) = gain * ((1.0 - mix) * base + mix * other) + offset;
      }
  return p;
}

}  // namespace mpilab::testing
