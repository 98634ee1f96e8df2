#include "mpilab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "fft.hpp"
#include "mpilab/error.hpp"

namespace mpilab {

using detail::cplx;
using detail::Fft2d;
using detail::signed_frequency;

void AnalysisMpi::validate() const {
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::InvalidArgument, "analysis mpi: width and height must be >= 2");
  }
  if (planes.empty() || planes.size() != disparities.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "analysis mpi: need one disparity per plane and at least one plane");
  }
  if (!(dx > 0.0) || !(dd > 0.0) || !(d_max > 0.0) || !std::isfinite(dx) ||
      !std::isfinite(dd) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::InvalidArgument, "analysis mpi: dx, dd and d_max must be > 0");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (!std::isfinite(disparities[i]) || (i > 0 && disparities[i] <= disparities[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "analysis mpi: disparities must be finite and ascending");
    }
    if (planes[i].empty()) continue;
    if (planes[i].size() != n) {
      throw Error(ErrorCode::InvalidArgument,
                  "analysis mpi: plane " + std::to_string(i) + " has the wrong size");
    }
    for (double v : planes[i]) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::Numeric,
                    "analysis mpi: non-finite entry on plane " + std::to_string(i));
      }
    }
  }
}

Image AnalysisMpi::plane_sum() const {
  Image out(width, height, 1);
  auto dst = out.data();
  for (const auto& p : planes) {
    if (p.empty()) continue;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += p[i];
  }
  return out;
}

double RenderableRange::u_max(double s) const {
  if (!std::isfinite(s) || s > 0.0) {
    throw Error(ErrorCode::DomainError,
                "renderable range: s = " + std::to_string(s) +
                    " is outside the guaranteed region (s <= 0)");
  }
  return dx * (1.0 - s * d_max) / dd;
}

RenderableRange renderable_range(double dx, double dd, double d_max) {
  if (!(dx > 0.0) || !(dd > 0.0) || !(d_max > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "renderable_range: parameters must be > 0");
  }
  return RenderableRange{dx, dd, d_max};
}

std::vector<double> lowpass_radial(const std::vector<double>& plane, int width, int height,
                                   double band_fraction) {
  Fft2d fft(width, height);
  std::vector<cplx> spec(plane.begin(), plane.end());
  fft.forward(spec);
  for (int y = 0; y < height; ++y) {
    const double ky = signed_frequency(y, height) / (0.5 * height);
    for (int x = 0; x < width; ++x) {
      const double kx = signed_frequency(x, width) / (0.5 * width);
      if (std::sqrt(kx * kx + ky * ky) > band_fraction) spec[y * width + x] = 0.0;
    }
  }
  fft.inverse(spec);
  std::vector<double> out(plane.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
  return out;
}

AnalysisMpi worst_case_mpi(int height, int width, int planes, double d_max,
                           double band_fraction, std::uint64_t seed) {
  if (planes < 2) throw Error(ErrorCode::InvalidArgument, "worst_case_mpi: D must be >= 2");
  if (width < 2 || height < 2) {
    throw Error(ErrorCode::InvalidArgument, "worst_case_mpi: image must be at least 2x2");
  }
  if (!(band_fraction > 0.0 && band_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "worst_case_mpi: band_fraction must be in (0, 1]");
  }
  if (!(d_max > 0.0) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::InvalidArgument, "worst_case_mpi: d_max must be > 0");
  }
  AnalysisMpi a;
  a.width = width;
  a.height = height;
  a.d_max = d_max;
  a.dd = d_max / (planes - 1);
  a.dx = 1.0;
  for (int i = 0; i < planes; ++i) a.disparities.push_back(i * a.dd);
  a.planes.resize(planes);

  const int content = (planes + 9) / 10;  // ceil(0.1 * D)
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (int j = 0; j < content; ++j) {
    std::vector<double> p(n);
    for (auto& v : p) v = (0.5 + 0.125 * normal(rng)) / content;
    if (band_fraction < 1.0) p = lowpass_radial(p, width, height, band_fraction);
    a.planes[planes - content + j] = std::move(p);
  }
  return a;
}

AnalysisMpi shift_content(const AnalysisMpi& a, int last_index) {
  int first = -1;
  int last = -1;
  for (int i = 0; i < a.plane_count(); ++i) {
    if (!a.is_zero(i)) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return a;
  const int offset = last_index - last;
  if (first + offset < 0 || last_index >= a.plane_count()) {
    throw Error(ErrorCode::InvalidArgument, "shift_content: content does not fit");
  }
  AnalysisMpi out = a;
  for (auto& p : out.planes) p.clear();
  for (int i = first; i <= last; ++i) out.planes[i + offset] = a.planes[i];
  return out;
}

namespace {

double wrap(double v, int n) {
  double r = std::fmod(v, static_cast<double>(n));
  if (r < 0.0) r += n;
  if (r >= n) r -= n;
  return r;
}

struct Tap {
  int i0, i1;
  double w0, w1;
};

// Bilinear taps along one axis for the given source positions.
std::vector<Tap> axis_taps(const std::vector<double>& pos, int n, Boundary boundary) {
  std::vector<Tap> taps(pos.size());
  for (std::size_t k = 0; k < pos.size(); ++k) {
    double p = pos[k];
    if (boundary == Boundary::Periodic) p = wrap(p, n);
    const double f0 = std::floor(p);
    const double f = p - f0;
    int i0 = static_cast<int>(f0);
    int i1 = i0 + 1;
    double w0 = 1.0 - f;
    double w1 = f;
    if (boundary == Boundary::Periodic) {
      i0 %= n;
      i1 %= n;
    } else {
      if (i0 < 0 || i0 >= n) w0 = 0.0, i0 = 0;
      if (i1 < 0 || i1 >= n) w1 = 0.0, i1 = 0;
    }
    taps[k] = {i0, i1, w0, w1};
  }
  return taps;
}

std::vector<double> lowpass_square(const std::vector<double>& plane, int width, int height,
                                   double fraction) {
  Fft2d fft(width, height);
  std::vector<cplx> spec(plane.begin(), plane.end());
  fft.forward(spec);
  for (int y = 0; y < height; ++y) {
    const double ky = std::abs(signed_frequency(y, height)) / (0.5 * height);
    for (int x = 0; x < width; ++x) {
      const double kx = std::abs(signed_frequency(x, width)) / (0.5 * width);
      if (kx > fraction || ky > fraction) spec[y * width + x] = 0.0;
    }
  }
  fft.inverse(spec);
  std::vector<double> out(plane.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
  return out;
}

void check_axial(const AnalysisMpi& a, double s) {
  if (!std::isfinite(s) || s * a.d_max >= 1.0) {
    throw Error(ErrorCode::DomainError,
                "render: s must be < 1/d_max (viewpoint inside the MPI volume)");
  }
}

}  // namespace

Image direct_projection_render(const AnalysisMpi& a, const Eigen::Vector2d& u, double s,
                               const DirectRenderOptions& options) {
  a.validate();
  check_axial(a, s);
  const int w = a.width;
  const int h = a.height;
  const double x0 = 0.5 * w;
  const double y0 = 0.5 * h;
  Image out(w, h, 1);
  std::vector<double> px(w), py(h);
  for (int d = 0; d < a.plane_count(); ++d) {
    if (a.is_zero(d)) continue;
    const double disp = a.disparities[d];
    const double m = options.mode == ProjectionMode::Exact ? 1.0 - s * disp : 1.0 - s * a.d_max;
    const std::vector<double>* src = &a.planes[d];
    std::vector<double> filtered;
    if (options.antialias && m > 1.0) {
      filtered = lowpass_square(a.planes[d], w, h, 1.0 / m);
      src = &filtered;
    }
    for (int x = 0; x < w; ++x) px[x] = m * (x - x0) + x0 + u.x() * disp;
    for (int y = 0; y < h; ++y) py[y] = m * (y - y0) + y0 + u.y() * disp;
    const auto tx = axis_taps(px, w, options.boundary);
    const auto ty = axis_taps(py, h, options.boundary);
    const auto& c = *src;
    for (int y = 0; y < h; ++y) {
      const Tap& t = ty[y];
      const double* r0 = c.data() + static_cast<std::size_t>(t.i0) * w;
      const double* r1 = c.data() + static_cast<std::size_t>(t.i1) * w;
      for (int x = 0; x < w; ++x) {
        const Tap& q = tx[x];
        const double top = q.w0 * r0[q.i0] + q.w1 * r0[q.i1];
        const double bottom = q.w0 * r1[q.i0] + q.w1 * r1[q.i1];
        out.at(x, y) += t.w0 * top + t.w1 * bottom;
      }
    }
  }
  return out;
}

struct SpectralRenderer::Impl {
  int width;
  int height;
  double d_max;
  Fft2d fft;
  std::vector<double> disparities;
  std::vector<std::vector<cplx>> spectra;

  Impl(int w, int h, double dm) : width(w), height(h), d_max(dm), fft(w, h) {}

  // Evaluates the band-limited periodic signal with spectrum g at the
  // dilated positions m (x - x0) + x0. Bins above the render Nyquist (|k| m
  // > n/2) are dropped first so the render is not aliased.
  Image synthesize_dilated(const std::vector<cplx>& g, double m) const {
    const int w = width;
    const int h = height;
    auto kept = [m](int n) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i) {
        if (2.0 * std::abs(signed_frequency(i, n)) * m <= n) idx.push_back(i);
      }
      return idx;
    };
    auto table = [m](int n, const std::vector<int>& idx) {
      const double c = 0.5 * n;
      std::vector<cplx> t(static_cast<std::size_t>(n) * idx.size());
      for (int x = 0; x < n; ++x) {
        const double pos = m * (x - c) + c;
        for (std::size_t j = 0; j < idx.size(); ++j) {
          const double phase = 2.0 * std::numbers::pi * signed_frequency(idx[j], n) * pos / n;
          t[x * idx.size() + j] = std::polar(1.0 / n, phase);
        }
      }
      return t;
    };
    const auto kx = kept(w);
    const auto ky = kept(h);
    const auto ex = table(w, kx);
    const auto ey = table(h, ky);
    std::vector<cplx> rows(ky.size() * static_cast<std::size_t>(w));
    for (std::size_t j = 0; j < ky.size(); ++j) {
      const cplx* src = g.data() + static_cast<std::size_t>(ky[j]) * w;
      for (int x = 0; x < w; ++x) {
        const cplx* e = ex.data() + static_cast<std::size_t>(x) * kx.size();
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < kx.size(); ++i) acc += src[kx[i]] * e[i];
        rows[j * w + x] = acc;
      }
    }
    Image out(w, h, 1);
    for (int y = 0; y < h; ++y) {
      const cplx* e = ey.data() + static_cast<std::size_t>(y) * ky.size();
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < ky.size(); ++j) acc += (e[j] * rows[j * w + x]).real();
        out.at(x, y) = acc;
      }
    }
    return out;
  }

  // Phase factors for a shift of `a` pixels along an axis of length n. The
  // Nyquist bin of an even length gets the real part so the output stays real.
  static void shift_factors(std::vector<cplx>& out, int n, double a) {
    out.resize(n);
    for (int i = 0; i < n; ++i) {
      const int k = signed_frequency(i, n);
      const double phase = 2.0 * std::numbers::pi * k * a / n;
      if (n % 2 == 0 && i == n / 2) {
        out[i] = std::cos(phase);
      } else {
        out[i] = std::polar(1.0, phase);
      }
    }
  }
};

SpectralRenderer::SpectralRenderer(const AnalysisMpi& a) {
  a.validate();
  impl_ = std::make_unique<Impl>(a.width, a.height, a.d_max);
  for (int d = 0; d < a.plane_count(); ++d) {
    if (a.is_zero(d)) continue;
    std::vector<cplx> spec(a.planes[d].begin(), a.planes[d].end());
    impl_->fft.forward(spec);
    impl_->disparities.push_back(a.disparities[d]);
    impl_->spectra.push_back(std::move(spec));
  }
}

SpectralRenderer::~SpectralRenderer() = default;
SpectralRenderer::SpectralRenderer(SpectralRenderer&&) noexcept = default;
SpectralRenderer& SpectralRenderer::operator=(SpectralRenderer&&) noexcept = default;

Image SpectralRenderer::render(const Eigen::Vector2d& u, double s) const {
  const Impl& im = *impl_;
  if (!std::isfinite(s) || s * im.d_max >= 1.0) {
    throw Error(ErrorCode::DomainError,
                "render: s must be < 1/d_max (viewpoint inside the MPI volume)");
  }
  const int w = im.width;
  const int h = im.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  // Sheared plane sum on the integer frequency grid.
  std::vector<cplx> g(n, cplx(0.0, 0.0));
  std::vector<cplx> fx, fy;
  for (std::size_t p = 0; p < im.spectra.size(); ++p) {
    const double d = im.disparities[p];
    Impl::shift_factors(fx, w, u.x() * d);
    Impl::shift_factors(fy, h, u.y() * d);
    const auto& c = im.spectra[p];
    for (int y = 0; y < h; ++y) {
      const cplx py = fy[y];
      const cplx* src = c.data() + static_cast<std::size_t>(y) * w;
      cplx* dst = g.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) dst[x] += src[x] * (fx[x] * py);
    }
  }

  const double m = 1.0 - s * im.d_max;
  if (m != 1.0) return im.synthesize_dilated(g, m);

  im.fft.inverse(g);
  Image out(w, h, 1);
  auto dst = out.data();
  for (std::size_t i = 0; i < n; ++i) dst[i] = g[i].real();
  return out;
}

Image fourier_slice_render(const AnalysisMpi& a, const Eigen::Vector2d& u, double s) {
  return SpectralRenderer(a).render(u, s);
}

double measure_bandwidth(const Image& img, double energy_quantile) {
  if (!(energy_quantile > 0.0 && energy_quantile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "measure_bandwidth: quantile must be in (0, 1)");
  }
  const Image gray = img.channels() == 1 ? img : luminance(img);
  const int w = gray.width();
  const int h = gray.height();
  const std::size_t n = gray.pixel_count();
  if (n == 0) return 0.0;
  double mean = 0.0;
  for (double v : gray.data()) mean += v;
  mean /= static_cast<double>(n);

  std::vector<double> hx(w), hy(h);
  for (int x = 0; x < w; ++x) hx[x] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * x / w);
  for (int y = 0; y < h; ++y) hy[y] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * y / h);

  std::vector<cplx> spec(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      spec[y * w + x] = (gray.at(x, y) - mean) * hx[x] * hy[y];
  Fft2d(w, h).forward(spec);

  std::vector<std::pair<double, double>> bins;  // (radius, energy)
  bins.reserve(n);
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    const double ky = signed_frequency(y, h) / (0.5 * h);
    for (int x = 0; x < w; ++x) {
      if (x == 0 && y == 0) continue;
      const double kx = signed_frequency(x, w) / (0.5 * w);
      const double e = std::norm(spec[y * w + x]);
      bins.emplace_back(std::sqrt(kx * kx + ky * ky), e);
      total += e;
    }
  }
  if (!(total > 1e-24 * static_cast<double>(n))) return 0.0;
  std::sort(bins.begin(), bins.end());
  const double target = energy_quantile * total;
  double acc = 0.0;
  for (const auto& [r, e] : bins) {
    acc += e;
    if (acc >= target) return r;
  }
  return bins.back().first;
}

AnalysisMpi tent_oracle(const AnalysisMpi& a, int factor) {
  a.validate();
  if (factor < 2) throw Error(ErrorCode::InvalidArgument, "tent_oracle: factor must be >= 2");
  const int d = a.plane_count();
  for (int i = 0; i < d; ++i) {
    if (std::abs(a.disparities[i] - (a.disparities[0] + i * a.dd)) > 1e-9 * (1.0 + a.d_max)) {
      throw Error(ErrorCode::InvalidArgument, "tent_oracle: disparities must be spaced by dd");
    }
  }
  AnalysisMpi o;
  o.width = a.width;
  o.height = a.height;
  o.dx = a.dx;
  o.dd = a.dd / factor;
  o.d_max = a.d_max;
  const int pad = factor - 1;
  const int count = factor * (d - 1) + 1 + 2 * pad;
  const std::size_t n = static_cast<std::size_t>(a.width) * a.height;
  o.disparities.resize(count);
  o.planes.resize(count);
  for (int g = 0; g < count; ++g) {
    const int fine = g - pad;  // offset from plane 0 in fine steps
    o.disparities[g] = a.disparities[0] + fine * o.dd;
    for (int j = 0; j < d; ++j) {
      const int k = fine - factor * j;
      if (std::abs(k) >= factor || a.is_zero(j)) continue;
      const double wk = (1.0 - static_cast<double>(std::abs(k)) / factor) / factor;
      auto& dst = o.planes[g];
      if (dst.empty()) dst.assign(n, 0.0);
      const auto& src = a.planes[j];
      for (std::size_t i = 0; i < n; ++i) dst[i] += wk * src[i];
    }
  }
  return o;
}

double psnr_data_range(const Image& test, const Image& reference) {
  if (!test.same_shape(reference) || reference.empty()) {
    throw Error(ErrorCode::InvalidArgument, "psnr: image shapes differ");
  }
  const auto r = reference.data();
  const auto t = test.data();
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  double peak = *hi - *lo;
  if (!(peak > 0.0)) peak = 1.0;
  double mse = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) mse += (t[i] - r[i]) * (t[i] - r[i]);
  mse /= static_cast<double>(r.size());
  if (!(mse > 0.0)) return kPsnrCeiling;
  return std::min(kPsnrCeiling, 10.0 * std::log10(peak * peak / mse));
}

EmpiricalRange empirical_range(const AnalysisMpi& a, double s,
                               const EmpiricalRangeOptions& options) {
  a.validate();
  if (options.steps_per_prediction < 1 || !(options.scan_max_factor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "empirical_range: invalid scan settings");
  }
  EmpiricalRange result;
  result.predicted_u_max = renderable_range(a.dx, a.dd, a.d_max).u_max(s);
  const double step = result.predicted_u_max / options.steps_per_prediction;
  const int steps =
      static_cast<int>(std::ceil(options.scan_max_factor * options.steps_per_prediction));
  result.scan_max = steps * step;
  result.report.resolution = step;

  const SpectralRenderer coarse(a);
  const SpectralRenderer oracle(tent_oracle(a, options.oracle_factor));
  const double thr = options.fidelity_threshold;
  for (int i = 0; i <= steps; ++i) {
    const double u = i * step;
    const Eigen::Vector2d uv(u, 0.0);
    const Image rc = coarse.render(uv, s);
    const Image ro = oracle.render(uv, s);
    BandwidthSample sample{u, psnr_data_range(rc, ro),
                           measure_bandwidth(rc, options.energy_quantile)};
    if (!result.report.onset && sample.psnr < thr) {
      if (result.report.curve.empty()) {
        result.report.onset = u;
      } else {
        const BandwidthSample& prev = result.report.curve.back();
        const double t = (prev.psnr - thr) / (prev.psnr - sample.psnr);
        result.report.onset = prev.u + t * (u - prev.u);
      }
    }
    result.report.curve.push_back(sample);
  }
  return result;
}

}  // namespace mpilab
