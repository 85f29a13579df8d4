#include "slam3d/fusion.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slam3d/rng.hpp"

namespace slam3d {

std::string_view to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::Multiply: return "multiply";
    case FusionStrategy::Concat: return "concat";
    case FusionStrategy::Attention: return "attention";
  }
  return "?";
}

std::string_view to_string(FusionPoint p) {
  switch (p) {
    case FusionPoint::AfterDla: return "after_dla";
    case FusionPoint::DuringDla: return "during_dla";
    case FusionPoint::HeadsOnly: return "heads_only";
  }
  return "?";
}

FusionStrategy parse_strategy(std::string_view name) {
  for (auto s : {FusionStrategy::Multiply, FusionStrategy::Concat, FusionStrategy::Attention})
    if (to_string(s) == name) return s;
  throw RangeError("unknown fusion strategy '" + std::string(name) + "'");
}

FusionPoint parse_point(std::string_view name) {
  for (auto p : {FusionPoint::AfterDla, FusionPoint::DuringDla, FusionPoint::HeadsOnly})
    if (to_string(p) == name) return p;
  throw RangeError("unknown fusion point '" + std::string(name) + "'");
}

std::string format_config(const FusionConfig& cfg) {
  char eps[32];
  std::snprintf(eps, sizeof eps, "%.17g", cfg.eps);
  std::ostringstream os;
  os << "strategy=" << to_string(cfg.strategy) << '\n'
     << "point=" << to_string(cfg.point) << '\n'
     << "out_channels=" << cfg.out_channels << '\n'
     << "eps=" << eps << '\n'
     << "seed=" << cfg.seed << '\n';
  return os.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view v, std::string_view key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw RangeError("config: bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

}  // namespace

FusionConfig parse_config(std::string_view text) {
  FusionConfig cfg;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw RangeError("config: expected key=value, got '" + std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "strategy") {
      cfg.strategy = parse_strategy(value);
    } else if (key == "point") {
      cfg.point = parse_point(value);
    } else if (key == "out_channels") {
      cfg.out_channels = parse_number<Index>(value, key);
      if (cfg.out_channels < 1) throw RangeError("config: out_channels must be positive");
    } else if (key == "eps") {
      cfg.eps = parse_number<double>(value, key);
      if (!(cfg.eps > 0)) throw RangeError("config: eps must be positive");
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, key);
    } else {
      throw RangeError("config: unknown key '" + std::string(key) + "'");
    }
  }
  return cfg;
}

FusionParams make_fusion_params(const FusionConfig& cfg, Index feature_channels, std::uint64_t site) {
  Rng rng(derive_seed(cfg.seed, 1000 + site));
  const Index in = feature_channels + (cfg.strategy == FusionStrategy::Concat ? 1 : 0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  FusionParams p;
  p.projection.weight.resize(cfg.out_channels, in);
  p.projection.bias.resize(cfg.out_channels);
  for (Index o = 0; o < cfg.out_channels; ++o)
    for (Index i = 0; i < in; ++i) p.projection.weight(o, i) = rng.uniform(-bound, bound);
  for (Index o = 0; o < cfg.out_channels; ++o) p.projection.bias(o) = rng.uniform(-0.1, 0.1);
  p.gate_scale = rng.uniform(0.5, 1.5);
  p.gate_offset = rng.uniform(-0.5, 0.5);
  return p;
}

Tensor fuse(const Tensor& features, const Tensor& prior, const FusionParams& params, const FusionConfig& cfg) {
  FuseOp op(params, cfg);
  return op.forward(features, prior);
}

FuseOp::FuseOp(FusionParams params, FusionConfig cfg)
    : params_(std::move(params)), cfg_(cfg), feature_std_(cfg.eps), prior_std_(cfg.eps) {}

Tensor FuseOp::forward(const Tensor& features, const Tensor& prior) {
  const Shape &sf = features.shape(), &sp = prior.shape();
  if (sf.batch != 1 || sp.batch != 1 || sp.channels != 1 || sp.height < sf.height || sp.width < sf.width)
    throw ShapeError("fuse: features " + to_string(sf) + " with prior " + to_string(sp));

  const Tensor resampled = resample_.forward(prior, sf.height, sf.width);
  const Tensor f = feature_std_.forward(features);
  const Tensor s = prior_std_.forward(resampled);
  Tensor combined;
  switch (cfg_.strategy) {
    case FusionStrategy::Multiply: combined = mul_.forward(f, s); break;
    case FusionStrategy::Concat: combined = concat_.forward(f, s); break;
    case FusionStrategy::Attention:
      combined = gate_.forward(f, s, params_.gate_scale, params_.gate_offset);
      break;
  }
  ran_ = true;
  return project_.forward(combined, params_.projection);
}

FuseGrads FuseOp::backward(const Tensor& upstream) const {
  if (!ran_) throw StateError("fuse: backward called before forward");
  auto proj = project_.backward(upstream);
  FuseGrads g;
  g.projection = std::move(proj.params);
  Tensor d_f, d_s;
  switch (cfg_.strategy) {
    case FusionStrategy::Multiply: {
      auto m = mul_.backward(proj.input);
      d_f = std::move(m.a);
      d_s = std::move(m.b);
      break;
    }
    case FusionStrategy::Concat: {
      auto c = concat_.backward(proj.input);
      d_f = std::move(c.a);
      d_s = std::move(c.b);
      break;
    }
    case FusionStrategy::Attention: {
      auto a = gate_.backward(proj.input);
      d_f = std::move(a.features);
      d_s = std::move(a.prior);
      g.gate_scale = a.scale;
      g.gate_offset = a.offset;
      break;
    }
  }
  g.features = feature_std_.backward(d_f);
  g.prior = resample_.backward(prior_std_.backward(d_s));
  return g;
}

namespace {

FusionParams params_from_inputs(const std::vector<Tensor>& in) {
  const Shape& ws = in[2].shape();
  FusionParams p;
  p.projection.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      in[2].data().data(), ws.height, ws.width);
  p.projection.bias = in[3].flat();
  p.gate_scale = in[4].data()[0];
  p.gate_offset = in[4].data()[1];
  return p;
}

}  // namespace

Differentiable fuse_differentiable(const FusionConfig& cfg) {
  Differentiable d;
  d.forward = [cfg](const std::vector<Tensor>& in) {
    return fuse(in.at(0), in.at(1), params_from_inputs(in), cfg);
  };
  d.backward = [cfg](const std::vector<Tensor>& in, const Tensor& upstream) {
    FuseOp op(params_from_inputs(in), cfg);
    op.forward(in[0], in[1]);
    auto g = op.backward(upstream);
    Tensor dw(in[2].shape()), db(in[3].shape()), dgate(in[4].shape());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        dw.data().data(), in[2].shape().height, in[2].shape().width) = g.projection.weight;
    db.flat() = g.projection.bias;
    dgate.data()[0] = g.gate_scale;
    dgate.data()[1] = g.gate_offset;
    return std::vector<Tensor>{std::move(g.features), std::move(g.prior), std::move(dw), std::move(db),
                               std::move(dgate)};
  };
  return d;
}

std::vector<Tensor> pack_fuse_inputs(const Tensor& features, const Tensor& prior, const FusionParams& params) {
  const auto& w = params.projection.weight;
  Tensor weight({1, 1, w.rows(), w.cols()});
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(weight.data().data(), w.rows(),
                                                                                    w.cols()) = w;
  Tensor bias({1, 1, 1, params.projection.bias.size()});
  bias.flat() = params.projection.bias;
  Tensor gate({1, 1, 1, 2}, {params.gate_scale, params.gate_offset});
  return {features, prior, std::move(weight), std::move(bias), std::move(gate)};
}

}  // namespace slam3d
