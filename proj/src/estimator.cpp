#include "mpilab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include "mpilab/error.hpp"

namespace mpilab {

using nlohmann::json;

namespace {

// Box mean over a (2r+1)^2 window with replicated borders.
Image box_mean(const Image& img, int r) {
  const int w = img.width();
  const int h = img.height();
  Image tmp(w, h, 1);
  Image out(w, h, 1);
  const double norm = 1.0 / (2 * r + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += img.at(std::clamp(x + k, 0, w - 1), y);
      tmp.at(x, y) = acc * norm;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += tmp.at(x, std::clamp(y + k, 0, h - 1));
      out.at(x, y) = acc * norm;
    }
  }
  return out;
}

void check_initial(const Mpi& mpi, const PlaneSweepVolume& psv, const std::string& who) {
  mpi.validate(who.c_str());
  if (!(mpi.sampling == psv.sampling) || mpi.width() != psv.width() ||
      mpi.height() != psv.height()) {
    throw Error(ErrorCode::ContractViolation,
                who + ": output grid differs from the plane-sweep volume");
  }
}

void check_hidden(const HiddenPrediction& hp, const VisibleVolume& vis, const std::string& who) {
  if (static_cast<int>(hp.alpha_fin.size()) != vis.plane_count()) {
    throw Error(ErrorCode::ContractViolation, who + ": alpha_fin plane count mismatch");
  }
  for (const Image& a : hp.alpha_fin) {
    if (a.width() != vis.width() || a.height() != vis.height() || a.channels() != 1) {
      throw Error(ErrorCode::ContractViolation, who + ": alpha_fin shape mismatch");
    }
    if (!a.within_unit_range()) {
      throw Error(ErrorCode::ContractViolation, who + ": alpha_fin outside [0,1]");
    }
  }
  hp.flows.validate(vis.width(), vis.height(), vis.plane_count(), who.c_str());
}

template <typename F>
auto stage(const std::string& label, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    rethrow_with_context(e, "stage " + label);
  }
}

}  // namespace

PhotoConsistencyPredictor::PhotoConsistencyPredictor(double temperature, int window)
    : temperature_(temperature), window_(window) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::InvalidArgument, "photo-consistency: temperature must be > 0");
  }
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "photo-consistency: window must be odd and >= 1");
  }
}

json PhotoConsistencyPredictor::parameters() const {
  return json{{"temperature", temperature_}, {"window", window_}};
}

Mpi PhotoConsistencyPredictor::predict(const PlaneSweepVolume& psv) const {
  if (psv.source_count() != 2) {
    throw Error(ErrorCode::Unsupported, "photo-consistency needs exactly 2 sources, got " +
                                            std::to_string(psv.source_count()));
  }
  const int w = psv.width();
  const int h = psv.height();
  const int planes = psv.plane_count();
  Mpi mpi = Mpi::zeros(psv.reference, psv.sampling);

  std::vector<Image> logits;
  logits.reserve(planes);
  for (int d = 0; d < planes; ++d) {
    const Image& p = psv.planes[d];
    Image sq(w, h, 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double a = p.at(x, y, c);
          const double b = p.at(x, y, 3 + c);
          const double diff = 255.0 * (a - b);
          acc += diff * diff;
          mpi.color[d].at(x, y, c) = std::clamp(0.5 * (a + b), 0.0, 1.0);
        }
        sq.at(x, y) = acc / 3.0;
      }
    }
    Image cost = box_mean(sq, window_ / 2);
    for (double& v : cost.data()) v = -v / temperature_;
    logits.push_back(std::move(cost));
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double top = -std::numeric_limits<double>::infinity();
      for (int d = 0; d < planes; ++d) top = std::max(top, logits[d].at(x, y));
      double z = 0.0;
      for (int d = 0; d < planes; ++d) z += std::exp(logits[d].at(x, y) - top);
      for (int d = 0; d < planes; ++d) {
        mpi.alpha[d].at(x, y) = std::exp(logits[d].at(x, y) - top) / z;
      }
    }
  }
  return mpi;
}

FixedMpiPredictor::FixedMpiPredictor(Mpi mpi, std::string label)
    : mpi_(std::move(mpi)), label_(std::move(label)) {}

Mpi FixedMpiPredictor::predict(const PlaneSweepVolume& psv) const {
  if (!(mpi_.sampling == psv.sampling) || mpi_.width() != psv.width() ||
      mpi_.height() != psv.height()) {
    throw Error(ErrorCode::ContractViolation,
                label_ + ": volume grid differs from the plane-sweep volume");
  }
  return mpi_;
}

NearestDonorPredictor::NearestDonorPredictor(int search_radius) : radius_(search_radius) {
  if (search_radius < 1) {
    throw Error(ErrorCode::InvalidArgument, "nearest-donor: search radius must be >= 1");
  }
}

json NearestDonorPredictor::parameters() const { return json{{"search_radius", radius_}}; }

HiddenPrediction NearestDonorPredictor::predict(const VisibleVolume& vis) const {
  const int w = vis.width();
  const int h = vis.height();
  const int planes = vis.plane_count();

  // Offsets within the radius in order of distance, then row-major.
  std::vector<std::tuple<int, int, int>> offsets;  // (dist^2, dy, dx)
  for (int dy = -radius_; dy <= radius_; ++dy)
    for (int dx = -radius_; dx <= radius_; ++dx)
      if (dx * dx + dy * dy <= radius_ * radius_) offsets.emplace_back(dx * dx + dy * dy, dy, dx);
  std::sort(offsets.begin(), offsets.end());

  HiddenPrediction out;
  out.flows = FlowVolume::zeros(w, h, planes);
  out.alpha_fin = vis.alpha_vis;
  Image cum(w, h, 1);
  for (int d = 0; d < planes; ++d) {
    const Image& a = vis.alpha_vis[d];
    for (std::size_t i = 0; i < cum.data().size(); ++i) cum.data()[i] += a.data()[i];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (a.at(x, y) >= 0.5) continue;
        for (const auto& [dist2, dy, dx] : offsets) {
          const int qx = x + dx;
          const int qy = y + dy;
          if (qx < 0 || qx >= w || qy < 0 || qy >= h) continue;
          if (cum.at(qx, qy) > 0.5) {
            out.flows.flow[d].at(x, y, 0) = dx;
            out.flows.flow[d].at(x, y, 1) = dy;
            out.alpha_fin[d].at(x, y) = a.at(qx, qy);
            break;
          }
        }
      }
    }
  }
  return out;
}

HiddenPrediction ZeroFlowPredictor::predict(const VisibleVolume& vis) const {
  return HiddenPrediction{vis.alpha_vis,
                          FlowVolume::zeros(vis.width(), vis.height(), vis.plane_count())};
}

FixedHiddenPredictor::FixedHiddenPredictor(HiddenPrediction prediction, std::string label)
    : prediction_(std::move(prediction)), label_(std::move(label)) {}

HiddenPrediction FixedHiddenPredictor::predict(const VisibleVolume&) const {
  return prediction_;
}

PipelineResult run_second_step(const Mpi& initial, const HiddenPredictor& phi2) {
  PipelineResult result;
  result.initial = initial;
  result.visible = stage("soft_remove_hidden", [&] { return soft_remove_hidden(initial); });
  const std::string phi2_label = "phi2 (" + phi2.name() + ")";
  result.hidden = stage(phi2_label, [&] {
    HiddenPrediction hp = phi2.predict(result.visible);
    check_hidden(hp, result.visible, phi2_label);
    return hp;
  });
  result.r_vis = stage("cumulative_visible_renders",
                       [&] { return cumulative_visible_renders(result.visible); });
  PlaneStack c_fin =
      stage("flow_gather", [&] { return flow_gather(result.r_vis, result.hidden.flows); });

  result.final.reference = initial.reference;
  result.final.sampling = initial.sampling;
  result.final.alpha = result.hidden.alpha_fin;
  for (Image& c : c_fin) {
    // r_vis is bounded by 1 up to rounding in the prefix sum.
    for (double& v : c.data()) v = std::clamp(v, 0.0, 1.0);
  }
  result.final.color = std::move(c_fin);
  result.provenance["phi2"] = json{{"name", phi2.name()}, {"parameters", phi2.parameters()}};
  return result;
}

PipelineResult run_two_step(std::span<const SourceView> sources, const Camera& reference,
                            const DisparitySampling& sampling, const InitialPredictor& phi1,
                            const HiddenPredictor& phi2) {
  const PlaneSweepVolume psv =
      stage("build_psv", [&] { return build_psv(sources, reference, sampling); });
  const std::string phi1_label = "phi1 (" + phi1.name() + ")";
  Mpi initial = stage(phi1_label, [&] {
    Mpi m = phi1.predict(psv);
    check_initial(m, psv, phi1_label);
    return m;
  });
  PipelineResult result = run_second_step(initial, phi2);
  result.provenance["phi1"] = json{{"name", phi1.name()}, {"parameters", phi1.parameters()}};
  result.provenance["sources"] = static_cast<int>(sources.size());
  return result;
}

}  // namespace mpilab
