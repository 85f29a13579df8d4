#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "slam3d/grad_check.hpp"
#include "slam3d/ops.hpp"

namespace slam3d {

enum class FusionStrategy { Multiply, Concat, Attention };
enum class FusionPoint { AfterDla, DuringDla, HeadsOnly };

std::string_view to_string(FusionStrategy s);
std::string_view to_string(FusionPoint p);
FusionStrategy parse_strategy(std::string_view name);  // multiply | concat | attention
FusionPoint parse_point(std::string_view name);        // after_dla | during_dla | heads_only

struct FusionConfig {
  FusionStrategy strategy = FusionStrategy::Multiply;
  FusionPoint point = FusionPoint::AfterDla;
  Index out_channels = 64;
  double eps = kDefaultEps;
  std::uint64_t seed = 0;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

/// Flat `key=value` lines: strategy, point, out_channels, eps, seed.
std::string format_config(const FusionConfig& cfg);
/// Unknown keys and malformed values are RangeError; omitted keys keep defaults.
FusionConfig parse_config(std::string_view text);

/// Learned state of one fusion site: the output projection and, for the
/// attention strategy, the two gate scalars.
struct FusionParams {
  Conv1x1Params<double> projection;
  double gate_scale = 1.0;
  double gate_offset = 0.0;
};

/// Seeded initialisation for a site fusing `feature_channels` channels.
/// `site` separates the draws of several sites built from one config.
FusionParams make_fusion_params(const FusionConfig& cfg, Index feature_channels, std::uint64_t site = 0);

/// Prior resampled to the feature grid, both standardized, combined by the
/// configured strategy and projected by a 1x1 convolution.
/// features: 1xCxhxw; prior: 1x1xHxW with H >= h, W >= w.
Tensor fuse(const Tensor& features, const Tensor& prior, const FusionParams& params, const FusionConfig& cfg);

struct FuseGrads {
  Tensor features;
  Tensor prior;
  Conv1x1Params<double> projection;
  double gate_scale = 0.0;
  double gate_offset = 0.0;
};

/// fuse() with recorded intermediates for an analytic backward pass.
class FuseOp {
 public:
  FuseOp(FusionParams params, FusionConfig cfg);

  Tensor forward(const Tensor& features, const Tensor& prior);
  FuseGrads backward(const Tensor& upstream) const;

 private:
  FusionParams params_;
  FusionConfig cfg_;
  bool ran_ = false;
  BilinearUpsampleOp<double> resample_;
  StandardizeOp<double> feature_std_;
  StandardizeOp<double> prior_std_;
  EltwiseMulOp<double> mul_;
  ConcatChannelsOp<double> concat_;
  LogisticGateOp<double> gate_;
  Conv1x1Op<double> project_;
};

/// fuse() as a function of {features, prior, weight (1x1xOxI), bias (1x1x1xO),
/// gate (1x1x1x2: scale, offset)} for gradient checking.
Differentiable fuse_differentiable(const FusionConfig& cfg);

/// Packs arguments in the input order fuse_differentiable expects.
std::vector<Tensor> pack_fuse_inputs(const Tensor& features, const Tensor& prior, const FusionParams& params);

}  // namespace slam3d
