#pragma once

// Numeric kernels used by the fusion module. Every differentiable kernel has
// a matching *_backward that maps an upstream gradient to input gradients.
// Reductions run in a fixed sequential order so results are bit-reproducible.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slam3d/tensor.hpp"

namespace slam3d {

inline constexpr double kDefaultEps = 1e-5;

template <typename Scalar>
struct Conv1x1Params {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weight;  // out_channels x in_channels
  Vector bias;    // out_channels

  Index in_channels() const { return weight.cols(); }
  Index out_channels() const { return weight.rows(); }
};

namespace detail {

/// Source taps for one output coordinate along one axis.
struct AxisTap {
  Index lo;
  Index hi;
  double frac;  // weight of `hi`
};

/// Half-pixel-center sampling, clamped to the edge:
/// src = (dst + 0.5) * in / out - 0.5.
inline std::vector<AxisTap> half_pixel_taps(Index in, Index out) {
  std::vector<AxisTap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (Index d = 0; d < out; ++d) {
    double p = (static_cast<double>(d) + 0.5) * scale - 0.5;
    p = std::clamp(p, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<Index>(std::floor(p));
    taps[static_cast<std::size_t>(d)] = {lo, std::min(lo + 1, in - 1), p - static_cast<double>(lo)};
  }
  return taps;
}

inline void require(bool ok, const char* what, const Shape& a, const Shape& b) {
  if (!ok) throw ShapeMismatch(std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// bilinear_upsample

/// Resamples every plane to out_h x out_w. Works for down-sampling too (same
/// sampler, no prefilter). Interpolates in lerp form so constant planes come
/// back bit-identical.
template <typename Scalar>
TensorT<Scalar> bilinear_upsample(const TensorT<Scalar>& t, Index out_h, Index out_w) {
  if (out_h < 1 || out_w < 1)
    throw ShapeMismatch("bilinear_upsample: output size must be positive");
  const Shape& s = t.shape();
  const auto ty = detail::half_pixel_taps(s.height, out_h);
  const auto tx = detail::half_pixel_taps(s.width, out_w);
  TensorT<Scalar> out({s.batch, s.channels, out_h, out_w});
  for (Index n = 0; n < s.batch; ++n)
    for (Index c = 0; c < s.channels; ++c) {
      const auto src = t.plane(n, c);
      auto dst = out.plane(n, c);
      for (Index y = 0; y < out_h; ++y) {
        const auto& ay = ty[static_cast<std::size_t>(y)];
        const Scalar wy = static_cast<Scalar>(ay.frac);
        for (Index x = 0; x < out_w; ++x) {
          const auto& ax = tx[static_cast<std::size_t>(x)];
          const Scalar wx = static_cast<Scalar>(ax.frac);
          const Scalar a = src(ay.lo, ax.lo), b = src(ay.lo, ax.hi);
          const Scalar c0 = src(ay.hi, ax.lo), d = src(ay.hi, ax.hi);
          const Scalar top = a + wx * (b - a);
          const Scalar bottom = c0 + wx * (d - c0);
          dst(y, x) = top + wy * (bottom - top);
        }
      }
    }
  return out;
}

/// Adjoint of bilinear_upsample: scatters each output gradient back onto its
/// four source taps with the forward weights.
template <typename Scalar>
TensorT<Scalar> bilinear_upsample_backward(const Shape& input_shape, const TensorT<Scalar>& upstream) {
  const Shape& us = upstream.shape();
  detail::require(us.batch == input_shape.batch && us.channels == input_shape.channels,
                  "bilinear_upsample_backward", input_shape, us);
  const auto ty = detail::half_pixel_taps(input_shape.height, us.height);
  const auto tx = detail::half_pixel_taps(input_shape.width, us.width);
  TensorT<Scalar> grad(input_shape);
  for (Index n = 0; n < us.batch; ++n)
    for (Index c = 0; c < us.channels; ++c) {
      const auto g = upstream.plane(n, c);
      auto dst = grad.plane(n, c);
      for (Index y = 0; y < us.height; ++y) {
        const auto& ay = ty[static_cast<std::size_t>(y)];
        const Scalar wy = static_cast<Scalar>(ay.frac);
        for (Index x = 0; x < us.width; ++x) {
          const auto& ax = tx[static_cast<std::size_t>(x)];
          const Scalar wx = static_cast<Scalar>(ax.frac);
          const Scalar v = g(y, x);
          dst(ay.lo, ax.lo) += (1 - wy) * (1 - wx) * v;
          dst(ay.lo, ax.hi) += (1 - wy) * wx * v;
          dst(ay.hi, ax.lo) += wy * (1 - wx) * v;
          dst(ay.hi, ax.hi) += wy * wx * v;
        }
      }
    }
  return grad;
}

// ---------------------------------------------------------------------------
// standardize

/// Per-(batch, channel) statistics over the spatial extent.
template <typename Scalar>
struct ChannelMoments {
  Scalar mean;
  Scalar variance;  // population
  Scalar scale;     // the divisor actually applied
  bool floored;     // true when the eps floor, not the variance, set `scale`
};

/// The divisor is sqrt(max((1 + eps) * var, eps)). Above the floor this is a
/// pure multiple of the standard deviation, so the result does not depend on
/// the input's scale; a constant plane divides by sqrt(eps) and maps to 0.
template <typename Scalar>
ChannelMoments<Scalar> channel_moments(const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& x,
                                       Scalar eps) {
  const Index n = x.size();
  Scalar sum = 0;
  for (Index i = 0; i < n; ++i) sum += x[i];
  const Scalar mean = sum / static_cast<Scalar>(n);
  Scalar sq = 0;
  for (Index i = 0; i < n; ++i) {
    const Scalar d = x[i] - mean;
    sq += d * d;
  }
  const Scalar var = sq / static_cast<Scalar>(n);
  const Scalar inflated = (1 + eps) * var;
  const bool floored = !(inflated > eps);
  return {mean, var, std::sqrt(floored ? eps : inflated), floored};
}

template <typename Scalar>
TensorT<Scalar> standardize(const TensorT<Scalar>& t, Scalar eps = Scalar(kDefaultEps)) {
  if (!(eps > 0)) throw Error("standardize: eps must be positive");
  const Shape& s = t.shape();
  TensorT<Scalar> out(s);
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  for (Index n = 0; n < s.batch; ++n)
    for (Index c = 0; c < s.channels; ++c) {
      Eigen::Map<const Vec> x(t.plane(n, c).data(), s.plane_size());
      Eigen::Map<Vec> y(out.plane(n, c).data(), s.plane_size());
      const auto m = channel_moments<Scalar>(x, eps);
      y = (x.array() - m.mean) / m.scale;
    }
  return out;
}

/// Gradient of standardize. With y = (x - mean) / s and s^2 = k * var
/// (k = 1 + eps above the floor, k = 0 on it):
///   dx = (g - mean(g) - k * y * mean(g * y)) / s
template <typename Scalar>
TensorT<Scalar> standardize_backward(const TensorT<Scalar>& input, const TensorT<Scalar>& upstream,
                                     Scalar eps = Scalar(kDefaultEps)) {
  detail::require(input.shape() == upstream.shape(), "standardize_backward", input.shape(),
                  upstream.shape());
  const Shape& s = input.shape();
  TensorT<Scalar> grad(s);
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto count = static_cast<Scalar>(s.plane_size());
  for (Index n = 0; n < s.batch; ++n)
    for (Index c = 0; c < s.channels; ++c) {
      Eigen::Map<const Vec> x(input.plane(n, c).data(), s.plane_size());
      Eigen::Map<const Vec> g(upstream.plane(n, c).data(), s.plane_size());
      Eigen::Map<Vec> dx(grad.plane(n, c).data(), s.plane_size());
      const auto m = channel_moments<Scalar>(x, eps);
      const Vec y = (x.array() - m.mean) / m.scale;
      const Scalar k = m.floored ? Scalar(0) : 1 + eps;
      const Scalar g_mean = g.sum() / count;
      const Scalar gy_mean = g.dot(y) / count;
      dx = (g.array() - g_mean - k * y.array() * gy_mean) / m.scale;
    }
  return grad;
}

// ---------------------------------------------------------------------------
// eltwise_mul

/// a * b element-wise. b may have a single channel, broadcast over a's.
template <typename Scalar>
TensorT<Scalar> eltwise_mul(const TensorT<Scalar>& a, const TensorT<Scalar>& b) {
  const Shape &sa = a.shape(), &sb = b.shape();
  detail::require(sa.same_spatial(sb) && (sb.channels == sa.channels || sb.channels == 1),
                  "eltwise_mul", sa, sb);
  if (sb.channels == sa.channels) {
    TensorT<Scalar> out(sa);
    out.flat() = a.flat().cwiseProduct(b.flat());
    return out;
  }
  TensorT<Scalar> out(sa);
  for (Index n = 0; n < sa.batch; ++n)
    out.channels(n) = a.channels(n).array().rowwise() * b.channels(n).row(0).array();
  return out;
}

template <typename Scalar>
struct BinaryGrads {
  TensorT<Scalar> a;
  TensorT<Scalar> b;
};

template <typename Scalar>
BinaryGrads<Scalar> eltwise_mul_backward(const TensorT<Scalar>& a, const TensorT<Scalar>& b,
                                         const TensorT<Scalar>& upstream) {
  detail::require(upstream.shape() == a.shape(), "eltwise_mul_backward", a.shape(), upstream.shape());
  BinaryGrads<Scalar> g{eltwise_mul(upstream, b), TensorT<Scalar>(b.shape())};
  if (b.shape().channels == a.shape().channels) {
    g.b.flat() = upstream.flat().cwiseProduct(a.flat());
  } else {
    for (Index n = 0; n < a.shape().batch; ++n)
      g.b.channels(n) = upstream.channels(n).cwiseProduct(a.channels(n)).colwise().sum();
  }
  return g;
}

// ---------------------------------------------------------------------------
// concat_channels

template <typename Scalar>
TensorT<Scalar> concat_channels(const TensorT<Scalar>& a, const TensorT<Scalar>& b) {
  const Shape &sa = a.shape(), &sb = b.shape();
  detail::require(sa.same_spatial(sb), "concat_channels", sa, sb);
  TensorT<Scalar> out({sa.batch, sa.channels + sb.channels, sa.height, sa.width});
  for (Index n = 0; n < sa.batch; ++n) {
    out.channels(n).topRows(sa.channels) = a.channels(n);
    out.channels(n).bottomRows(sb.channels) = b.channels(n);
  }
  return out;
}

template <typename Scalar>
BinaryGrads<Scalar> concat_channels_backward(Index a_channels, const TensorT<Scalar>& upstream) {
  const Index rest = upstream.shape().channels - a_channels;
  return {slice_channels(upstream, 0, a_channels), slice_channels(upstream, a_channels, rest)};
}

// ---------------------------------------------------------------------------
// conv1x1

template <typename Scalar>
TensorT<Scalar> conv1x1(const TensorT<Scalar>& t, const Conv1x1Params<Scalar>& p) {
  const Shape& s = t.shape();
  if (p.in_channels() != s.channels || p.bias.size() != p.out_channels())
    throw ShapeMismatch("conv1x1: params " + std::to_string(p.out_channels()) + "x" +
                        std::to_string(p.in_channels()) + " for input " + to_string(s));
  TensorT<Scalar> out({s.batch, p.out_channels(), s.height, s.width});
  for (Index n = 0; n < s.batch; ++n) {
    auto y = out.channels(n);
    y.noalias() = p.weight * t.channels(n);
    y.colwise() += p.bias;
  }
  return out;
}

template <typename Scalar>
struct Conv1x1Grads {
  TensorT<Scalar> input;
  Conv1x1Params<Scalar> params;  // d weight, d bias
};

template <typename Scalar>
Conv1x1Grads<Scalar> conv1x1_backward(const TensorT<Scalar>& input, const Conv1x1Params<Scalar>& p,
                                      const TensorT<Scalar>& upstream) {
  const Shape& s = input.shape();
  const Shape& us = upstream.shape();
  detail::require(s.same_spatial(us) && us.channels == p.out_channels(), "conv1x1_backward", s, us);
  Conv1x1Grads<Scalar> g{TensorT<Scalar>(s), {}};
  g.params.weight.setZero(p.out_channels(), p.in_channels());
  g.params.bias.setZero(p.out_channels());
  for (Index n = 0; n < s.batch; ++n) {
    g.input.channels(n).noalias() = p.weight.transpose() * upstream.channels(n);
    g.params.weight.noalias() += upstream.channels(n) * input.channels(n).transpose();
    g.params.bias += upstream.channels(n).rowwise().sum();
  }
  return g;
}

// ---------------------------------------------------------------------------
// logistic gate (attention fusion)

/// fused = features * logistic(scale * prior + offset); prior has one channel.
template <typename Scalar>
TensorT<Scalar> logistic_gate(const TensorT<Scalar>& features, const TensorT<Scalar>& prior,
                              Scalar scale, Scalar offset) {
  TensorT<Scalar> gate(prior.shape());
  gate.flat() = prior.flat().unaryExpr(
      [&](Scalar s) { return Scalar(1) / (Scalar(1) + std::exp(-(scale * s + offset))); });
  return eltwise_mul(features, gate);
}

template <typename Scalar>
struct GateGrads {
  TensorT<Scalar> features;
  TensorT<Scalar> prior;
  Scalar scale;
  Scalar offset;
};

template <typename Scalar>
GateGrads<Scalar> logistic_gate_backward(const TensorT<Scalar>& features, const TensorT<Scalar>& prior,
                                         Scalar scale, Scalar offset,
                                         const TensorT<Scalar>& upstream) {
  TensorT<Scalar> gate(prior.shape());
  gate.flat() = prior.flat().unaryExpr(
      [&](Scalar s) { return Scalar(1) / (Scalar(1) + std::exp(-(scale * s + offset))); });
  auto mul = eltwise_mul_backward(features, gate, upstream);
  // mul.b is dL/dgate; chain through the logistic.
  TensorT<Scalar> dz(prior.shape());
  dz.flat() = mul.b.flat().cwiseProduct(gate.flat().cwiseProduct((1 - gate.flat().array()).matrix()));
  GateGrads<Scalar> g{std::move(mul.a), TensorT<Scalar>(prior.shape()), dz.flat().dot(prior.flat()),
                      dz.flat().sum()};
  g.prior.flat() = dz.flat() * scale;
  return g;
}

// ---------------------------------------------------------------------------
// forward-only helpers for the toy feature provider

/// 2x2 average pooling with stride 2; spatial dims must be even.
template <typename Scalar>
TensorT<Scalar> avg_pool2x2(const TensorT<Scalar>& t) {
  const Shape& s = t.shape();
  if (s.height % 2 != 0 || s.width % 2 != 0)
    throw ShapeMismatch("avg_pool2x2 needs even spatial dims, got " + to_string(s));
  TensorT<Scalar> out({s.batch, s.channels, s.height / 2, s.width / 2});
  for (Index n = 0; n < s.batch; ++n)
    for (Index c = 0; c < s.channels; ++c) {
      const auto src = t.plane(n, c);
      auto dst = out.plane(n, c);
      for (Index y = 0; y < dst.rows(); ++y)
        for (Index x = 0; x < dst.cols(); ++x)
          dst(y, x) = (src(2 * y, 2 * x) + src(2 * y, 2 * x + 1) + src(2 * y + 1, 2 * x) +
                       src(2 * y + 1, 2 * x + 1)) /
                      Scalar(4);
    }
  return out;
}

}  // namespace slam3d
