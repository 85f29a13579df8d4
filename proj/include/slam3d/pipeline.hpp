#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slam3d/fusion.hpp"
#include "slam3d/prior_map.hpp"

namespace slam3d {

inline constexpr std::array<Index, 4> kPyramidStrides{4, 8, 16, 32};

/// Channel width of each pyramid level (stride 4, 8, 16, 32).
using PyramidWidths = std::array<Index, 4>;
inline constexpr PyramidWidths kDefaultPyramidWidths{16, 32, 64, 128};

struct FeaturePyramid {
  std::vector<Tensor> levels;
};

/// Fixed random 1x1 convolutions (zero bias) between 2x2 average pools.
/// Deterministic stand-in for a pretrained backbone.
struct ToyBackbone {
  std::array<Conv1x1Params<double>, 4> stages;

  static ToyBackbone seeded(std::uint64_t seed, const PyramidWidths& widths = kDefaultPyramidWidths);
  FeaturePyramid operator()(const Tensor& image) const;
};

/// Per-node hook for the aggregator; receives the node's projected features
/// (at the node's own resolution) and the level index.
using AggregationTap = std::function<Tensor(const Tensor& node, std::size_t level)>;

/// Stand-in for the aggregation network: every level is projected to
/// `width` channels by a 1x1 convolution, optionally passed through the tap,
/// upsampled to stride 4 and summed.
struct ToyAggregator {
  std::vector<Conv1x1Params<double>> nodes;

  static ToyAggregator seeded(std::uint64_t seed, const PyramidWidths& widths = kDefaultPyramidWidths,
                              Index width = 64);
  Tensor operator()(const FeaturePyramid& p, const AggregationTap& tap = {}) const;
};

/// Image must be 1x3xHxW with H and W divisible by 32 (ShapeError otherwise).
FeaturePyramid toy_backbone(const Tensor& image, std::uint64_t seed,
                            const PyramidWidths& widths = kDefaultPyramidWidths);
Tensor toy_aggregate(const FeaturePyramid& p, std::uint64_t seed, const AggregationTap& tap = {},
                     Index width = 64);

struct StageTiming {
  std::string name;
  double ms = 0.0;
  std::int64_t peak_bytes = 0;  // run high-water mark at the end of the stage
};

struct TimingReport {
  std::vector<StageTiming> stages;
  double total_ms = 0.0;
  std::int64_t peak_bytes = 0;

  double stage_sum_ms() const;
};

/// What the detection heads would receive. head_2d feeds the 2D branch,
/// head_3d the depth / 3D regression branch.
struct PipelineOutput {
  Tensor head_2d;
  Tensor head_3d;
  int fuse_calls = 0;
  TimingReport timing;
};

/// Backbone + aggregator + fusion sites for one FusionConfig. Immutable after
/// construction; run() may be called concurrently.
class FusionPipeline {
 public:
  explicit FusionPipeline(FusionConfig cfg, const PyramidWidths& widths = kDefaultPyramidWidths);

  /// Prior must have the image's spatial size.
  PipelineOutput run(const Tensor& image, const GrayPriorMap& prior) const;
  PipelineOutput run(const Tensor& image, const Tensor& prior) const;
  /// The same network with no prior injected anywhere.
  PipelineOutput run_unfused(const Tensor& image) const;

  const FusionConfig& config() const { return cfg_; }
  const ToyBackbone& backbone() const { return backbone_; }
  const ToyAggregator& aggregator() const { return aggregator_; }
  const std::vector<FusionParams>& fusion_sites() const { return sites_; }

 private:
  PipelineOutput execute(const Tensor& image, const GrayPriorMap* map, const Tensor* prior) const;

  FusionConfig cfg_;
  ToyBackbone backbone_;
  ToyAggregator aggregator_;
  std::vector<FusionParams> sites_;  // one for after_dla / heads_only, one per level for during_dla
};

PipelineOutput run_pipeline(const Tensor& image, const GrayPriorMap& prior, const FusionConfig& cfg);

/// Timing report as JSON text (stages, total, peak bytes).
std::string timing_to_json(const TimingReport& report);

/// 8-bit RGB to a 1x3xHxW tensor scaled to [0, 1].
Tensor rgb_to_tensor(const RgbImage& img);

}  // namespace slam3d
