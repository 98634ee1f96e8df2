#pragma once

#include <memory>
#include <span>
#include <string>

#include <json.hpp>

#include "mpilab/mpi.hpp"
#include "mpilab/render.hpp"

namespace mpilab {

/// First stage: plane-sweep volume to an initial MPI on the same grid.
class InitialPredictor {
 public:
  virtual ~InitialPredictor() = default;
  virtual std::string name() const = 0;
  virtual nlohmann::json parameters() const { return nlohmann::json::object(); }
  virtual Mpi predict(const PlaneSweepVolume& psv) const = 0;
};

struct HiddenPrediction {
  PlaneStack alpha_fin;  // 1 channel per plane
  FlowVolume flows;
};

/// Second stage: visible content to final alpha plus per-voxel flows into the
/// cumulative visible renders.
class HiddenPredictor {
 public:
  virtual ~HiddenPredictor() = default;
  virtual std::string name() const = 0;
  virtual nlohmann::json parameters() const { return nlohmann::json::object(); }
  virtual HiddenPrediction predict(const VisibleVolume& vis) const = 0;
};

/// Classical stand-in for the first stage with two sources: per-plane cost is
/// the window-averaged squared difference of the two source slices in 8-bit
/// code values, alpha is softmax(-cost / temperature) over planes and color is
/// the mean of the two slices. Other source counts raise Unsupported.
class PhotoConsistencyPredictor final : public InitialPredictor {
 public:
  explicit PhotoConsistencyPredictor(double temperature = 10.0, int window = 3);
  std::string name() const override { return "photo-consistency"; }
  nlohmann::json parameters() const override;
  Mpi predict(const PlaneSweepVolume& psv) const override;

 private:
  double temperature_;
  int window_;
};

/// Returns a fixed MPI (ground truth or an externally produced volume) after
/// checking it sits on the PSV's grid.
class FixedMpiPredictor final : public InitialPredictor {
 public:
  explicit FixedMpiPredictor(Mpi mpi, std::string label = "fixed-mpi");
  std::string name() const override { return label_; }
  Mpi predict(const PlaneSweepVolume& psv) const override;

 private:
  Mpi mpi_;
  std::string label_;
};

/// Hidden voxels (alpha_vis < 0.5) take their flow from the nearest pixel
/// within `search_radius` (Euclidean order, row-major ties) whose cumulative
/// visibility at that plane, sum_{d' <= d} alpha_vis, exceeds 0.5; alpha_fin is
/// the donor's alpha_vis there. Without a donor the flow is zero and alpha_fin
/// keeps alpha_vis. Visible voxels keep zero flow and their alpha_vis.
class NearestDonorPredictor final : public HiddenPredictor {
 public:
  explicit NearestDonorPredictor(int search_radius = 16);
  std::string name() const override { return "nearest-donor"; }
  nlohmann::json parameters() const override;
  HiddenPrediction predict(const VisibleVolume& vis) const override;

 private:
  int radius_;
};

/// Zero flow and alpha_fin = alpha_vis.
class ZeroFlowPredictor final : public HiddenPredictor {
 public:
  std::string name() const override { return "zero-flow"; }
  HiddenPrediction predict(const VisibleVolume& vis) const override;
};

/// Returns externally supplied alpha and flows.
class FixedHiddenPredictor final : public HiddenPredictor {
 public:
  explicit FixedHiddenPredictor(HiddenPrediction prediction, std::string label = "fixed-flow");
  std::string name() const override { return label_; }
  HiddenPrediction predict(const VisibleVolume& vis) const override;

 private:
  HiddenPrediction prediction_;
  std::string label_;
};

struct PipelineResult {
  Mpi initial;
  VisibleVolume visible;
  PlaneStack r_vis;
  HiddenPrediction hidden;
  Mpi final;
  nlohmann::json provenance;
};

/// build_psv -> phi1 -> soft_remove_hidden -> phi2 -> cumulative_visible_renders
/// -> flow_gather. The final MPI stores the gathered c_fin directly as plane
/// color with alpha_fin. Errors carry the name of the stage that raised them.
PipelineResult run_two_step(std::span<const SourceView> sources, const Camera& reference,
                            const DisparitySampling& sampling, const InitialPredictor& phi1,
                            const HiddenPredictor& phi2);

/// The stages after the PSV, for callers that already hold an initial MPI.
PipelineResult run_second_step(const Mpi& initial, const HiddenPredictor& phi2);

}  // namespace mpilab
