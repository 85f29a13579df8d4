#pragma once

// Single-use op recorders: forward() caches what backward() needs. Calling
// backward() on a recorder whose forward has not run raises StateError.

#include <optional>
#include <utility>

#include "slam3d/kernels.hpp"

namespace slam3d {

namespace detail {
[[noreturn]] inline void no_forward(const char* op) {
  throw StateError(std::string(op) + ": backward called before forward");
}
}  // namespace detail

template <typename Scalar>
class EltwiseMulOp {
 public:
  TensorT<Scalar> forward(const TensorT<Scalar>& a, const TensorT<Scalar>& b) {
    auto out = eltwise_mul(a, b);
    saved_.emplace(a, b);
    return out;
  }
  BinaryGrads<Scalar> backward(const TensorT<Scalar>& upstream) const {
    if (!saved_) detail::no_forward("eltwise_mul");
    return eltwise_mul_backward(saved_->first, saved_->second, upstream);
  }

 private:
  std::optional<std::pair<TensorT<Scalar>, TensorT<Scalar>>> saved_;
};

template <typename Scalar>
class ConcatChannelsOp {
 public:
  TensorT<Scalar> forward(const TensorT<Scalar>& a, const TensorT<Scalar>& b) {
    auto out = concat_channels(a, b);
    a_channels_ = a.shape().channels;
    return out;
  }
  BinaryGrads<Scalar> backward(const TensorT<Scalar>& upstream) const {
    if (!a_channels_) detail::no_forward("concat_channels");
    return concat_channels_backward(*a_channels_, upstream);
  }

 private:
  std::optional<Index> a_channels_;
};

template <typename Scalar>
class Conv1x1Op {
 public:
  TensorT<Scalar> forward(const TensorT<Scalar>& t, const Conv1x1Params<Scalar>& p) {
    auto out = conv1x1(t, p);
    saved_.emplace(t, p);
    return out;
  }
  Conv1x1Grads<Scalar> backward(const TensorT<Scalar>& upstream) const {
    if (!saved_) detail::no_forward("conv1x1");
    return conv1x1_backward(saved_->first, saved_->second, upstream);
  }

 private:
  std::optional<std::pair<TensorT<Scalar>, Conv1x1Params<Scalar>>> saved_;
};

template <typename Scalar>
class StandardizeOp {
 public:
  explicit StandardizeOp(Scalar eps = Scalar(kDefaultEps)) : eps_(eps) {}

  TensorT<Scalar> forward(const TensorT<Scalar>& t) {
    auto out = standardize(t, eps_);
    input_ = t;
    return out;
  }
  TensorT<Scalar> backward(const TensorT<Scalar>& upstream) const {
    if (!input_) detail::no_forward("standardize");
    return standardize_backward(*input_, upstream, eps_);
  }

 private:
  Scalar eps_;
  std::optional<TensorT<Scalar>> input_;
};

template <typename Scalar>
class BilinearUpsampleOp {
 public:
  TensorT<Scalar> forward(const TensorT<Scalar>& t, Index out_h, Index out_w) {
    auto out = bilinear_upsample(t, out_h, out_w);
    input_shape_ = t.shape();
    return out;
  }
  TensorT<Scalar> backward(const TensorT<Scalar>& upstream) const {
    if (!input_shape_) detail::no_forward("bilinear_upsample");
    return bilinear_upsample_backward(*input_shape_, upstream);
  }

 private:
  std::optional<Shape> input_shape_;
};

template <typename Scalar>
class LogisticGateOp {
 public:
  TensorT<Scalar> forward(const TensorT<Scalar>& features, const TensorT<Scalar>& prior, Scalar scale,
                          Scalar offset) {
    auto out = logistic_gate(features, prior, scale, offset);
    saved_.emplace(Saved{features, prior, scale, offset});
    return out;
  }
  GateGrads<Scalar> backward(const TensorT<Scalar>& upstream) const {
    if (!saved_) detail::no_forward("logistic_gate");
    return logistic_gate_backward(saved_->features, saved_->prior, saved_->scale, saved_->offset,
                                  upstream);
  }

 private:
  struct Saved {
    TensorT<Scalar> features;
    TensorT<Scalar> prior;
    Scalar scale;
    Scalar offset;
  };
  std::optional<Saved> saved_;
};

}  // namespace slam3d
