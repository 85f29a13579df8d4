#include "slam3d/pipeline.hpp"

#include <chrono>
#include <json.hpp>
#include <numeric>

#include "slam3d/rng.hpp"

namespace slam3d {

namespace {

Conv1x1Params<double> random_projection(Rng& rng, Index out, Index in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Conv1x1Params<double> p;
  p.weight.resize(out, in);
  for (Index o = 0; o < out; ++o)
    for (Index i = 0; i < in; ++i) p.weight(o, i) = rng.uniform(-bound, bound);
  p.bias.setZero(out);
  return p;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

ToyBackbone ToyBackbone::seeded(std::uint64_t seed, const PyramidWidths& widths) {
  Rng rng(derive_seed(seed, 1));
  ToyBackbone b;
  Index in = 3;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    b.stages[i] = random_projection(rng, widths[i], in);
    in = widths[i];
  }
  return b;
}

FeaturePyramid ToyBackbone::operator()(const Tensor& image) const {
  const Shape& s = image.shape();
  if (s.batch != 1 || s.channels != 3 || s.height % 32 != 0 || s.width % 32 != 0 || s.height == 0 || s.width == 0)
    throw ShapeError("toy_backbone wants 1x3xHxW with H, W divisible by 32, got " + to_string(s));
  FeaturePyramid p;
  Tensor x = avg_pool2x2(avg_pool2x2(image));
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i > 0) x = avg_pool2x2(x);
    x = conv1x1(x, stages[i]);
    p.levels.push_back(x);
  }
  return p;
}

ToyAggregator ToyAggregator::seeded(std::uint64_t seed, const PyramidWidths& widths, Index width) {
  Rng rng(derive_seed(seed, 2));
  ToyAggregator a;
  for (Index in : widths) a.nodes.push_back(random_projection(rng, width, in));
  return a;
}

Tensor ToyAggregator::operator()(const FeaturePyramid& p, const AggregationTap& tap) const {
  if (p.levels.size() != nodes.size())
    throw ShapeError("toy_aggregate: pyramid has " + std::to_string(p.levels.size()) + " levels, expected " +
                     std::to_string(nodes.size()));
  const Shape& base = p.levels.front().shape();
  Tensor sum;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Tensor node = conv1x1(p.levels[i], nodes[i]);
    if (tap) node = tap(node, i);
    Tensor up = bilinear_upsample(node, base.height, base.width);
    if (i == 0) {
      sum = std::move(up);
    } else {
      if (up.shape() != sum.shape())
        throw ShapeError("toy_aggregate: node " + std::to_string(i) + " is " + to_string(up.shape()));
      sum.flat() += up.flat();
    }
  }
  return sum;
}

FeaturePyramid toy_backbone(const Tensor& image, std::uint64_t seed, const PyramidWidths& widths) {
  return ToyBackbone::seeded(seed, widths)(image);
}

Tensor toy_aggregate(const FeaturePyramid& p, std::uint64_t seed, const AggregationTap& tap, Index width) {
  PyramidWidths widths{};
  if (p.levels.size() != widths.size()) throw ShapeError("toy_aggregate expects a 4-level pyramid");
  for (std::size_t i = 0; i < widths.size(); ++i) widths[i] = p.levels[i].shape().channels;
  return ToyAggregator::seeded(seed, widths, width)(p, tap);
}

double TimingReport::stage_sum_ms() const {
  return std::accumulate(stages.begin(), stages.end(), 0.0,
                         [](double acc, const StageTiming& s) { return acc + s.ms; });
}

FusionPipeline::FusionPipeline(FusionConfig cfg, const PyramidWidths& widths)
    : cfg_(cfg),
      backbone_(ToyBackbone::seeded(cfg.seed, widths)),
      aggregator_(ToyAggregator::seeded(cfg.seed, widths, cfg.out_channels)) {
  const std::size_t n_sites = cfg.point == FusionPoint::DuringDla ? widths.size() : 1;
  for (std::size_t i = 0; i < n_sites; ++i) sites_.push_back(make_fusion_params(cfg_, cfg_.out_channels, i));
}

PipelineOutput FusionPipeline::run(const Tensor& image, const GrayPriorMap& prior) const {
  return execute(image, &prior, nullptr);
}

PipelineOutput FusionPipeline::run(const Tensor& image, const Tensor& prior) const {
  return execute(image, nullptr, &prior);
}

PipelineOutput FusionPipeline::run_unfused(const Tensor& image) const { return execute(image, nullptr, nullptr); }

PipelineOutput FusionPipeline::execute(const Tensor& image, const GrayPriorMap* map, const Tensor* prior) const {
  const auto t_start = Clock::now();
  MemoryScope memory;
  PipelineOutput out;
  auto stage = [&](const char* name, auto&& body) {
    const auto t0 = Clock::now();
    auto result = body();
    out.timing.stages.push_back({name, ms_since(t0), memory.peak_bytes()});
    return result;
  };

  const bool fused = map != nullptr || prior != nullptr;
  Tensor prior_plane;
  if (map) {
    prior_plane = stage("prior_tensor", [&] { return map_to_tensor(*map); });
    prior = &prior_plane;
  }
  if (fused) {
    const Shape &si = image.shape(), &sp = prior->shape();
    if (sp.batch != 1 || sp.channels != 1 || sp.height != si.height || sp.width != si.width)
      throw ShapeError("prior " + to_string(sp) + " is not aligned with image " + to_string(si));
  }

  const FeaturePyramid pyramid = stage("backbone", [&] { return backbone_(image); });

  AggregationTap tap;
  if (fused && cfg_.point == FusionPoint::DuringDla) {
    tap = [&](const Tensor& node, std::size_t level) {
      ++out.fuse_calls;
      return fuse(node, *prior, sites_[level], cfg_);
    };
  }
  const Tensor aggregate = stage("aggregate", [&] { return aggregator_(pyramid, tap); });

  Tensor fused_aggregate;
  if (fused && cfg_.point != FusionPoint::DuringDla) {
    fused_aggregate = stage("fuse", [&] {
      ++out.fuse_calls;
      return fuse(aggregate, *prior, sites_.front(), cfg_);
    });
  }

  stage("heads", [&] {
    if (fused && cfg_.point == FusionPoint::AfterDla) {
      out.head_2d = fused_aggregate;
      out.head_3d = fused_aggregate;
    } else if (fused && cfg_.point == FusionPoint::HeadsOnly) {
      out.head_2d = aggregate;
      out.head_3d = fused_aggregate;
    } else {
      out.head_2d = aggregate;
      out.head_3d = aggregate;
    }
    return 0;
  });

  out.timing.peak_bytes = memory.peak_bytes();
  out.timing.total_ms = ms_since(t_start);
  return out;
}

PipelineOutput run_pipeline(const Tensor& image, const GrayPriorMap& prior, const FusionConfig& cfg) {
  return FusionPipeline(cfg).run(image, prior);
}

std::string timing_to_json(const TimingReport& report) {
  nlohmann::json j;
  j["total_ms"] = report.total_ms;
  j["peak_bytes"] = report.peak_bytes;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : report.stages) j["stages"].push_back({{"name", s.name}, {"ms", s.ms}, {"peak_bytes", s.peak_bytes}});
  return j.dump(2);
}

Tensor rgb_to_tensor(const RgbImage& img) {
  Tensor t({1, 3, img.height, img.width});
  for (Index y = 0; y < img.height; ++y)
    for (Index x = 0; x < img.width; ++x)
      for (Index c = 0; c < 3; ++c) t(0, c, y, x) = img.data(y, 3 * x + c) / 255.0;
  return t;
}

}  // namespace slam3d
