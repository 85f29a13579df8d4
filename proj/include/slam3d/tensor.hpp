#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "slam3d/error.hpp"
#include "slam3d/memory_probe.hpp"

namespace slam3d {

using Index = Eigen::Index;

/// (batch, channels, height, width); width is the fastest-moving axis.
struct Shape {
  Index batch = 0;
  Index channels = 0;
  Index height = 0;
  Index width = 0;

  Index plane_size() const { return height * width; }
  Index size() const { return batch * channels * height * width; }
  bool same_spatial(const Shape& o) const {
    return batch == o.batch && height == o.height && width == o.width;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense rank-4 tensor, row-major. Eigen maps give matrix views of a single
/// plane (H x W) or of all channels of one batch item (C x H*W).
template <typename Scalar>
class TensorT {
 public:
  using Storage = std::vector<Scalar, TrackingAllocator<Scalar>>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  TensorT() = default;

  explicit TensorT(const Shape& shape, Scalar fill = Scalar(0))
      : shape_(shape), data_(static_cast<std::size_t>(checked_size(shape)), fill) {}

  TensorT(const Shape& shape, std::initializer_list<Scalar> values) : TensorT(shape) {
    if (static_cast<Index>(values.size()) != shape.size())
      throw ShapeMismatch("initializer has " + std::to_string(values.size()) +
                          " values for shape " + to_string(shape));
    std::copy(values.begin(), values.end(), data_.begin());
  }

  static TensorT zeros(const Shape& shape) { return TensorT(shape); }
  static TensorT constant(const Shape& shape, Scalar v) { return TensorT(shape, v); }

  const Shape& shape() const { return shape_; }
  Index size() const { return shape_.size(); }
  bool empty() const { return data_.empty(); }

  Scalar& operator()(Index n, Index c, Index h, Index w) { return data_[offset(n, c, h, w)]; }
  Scalar operator()(Index n, Index c, Index h, Index w) const { return data_[offset(n, c, h, w)]; }

  std::span<Scalar> data() { return data_; }
  std::span<const Scalar> data() const { return data_; }

  VectorMap flat() { return VectorMap(data_.data(), size()); }
  ConstVectorMap flat() const { return ConstVectorMap(data_.data(), size()); }

  /// H x W view of plane (n, c).
  MatrixMap plane(Index n, Index c) {
    return MatrixMap(data_.data() + offset(n, c, 0, 0), shape_.height, shape_.width);
  }
  ConstMatrixMap plane(Index n, Index c) const {
    return ConstMatrixMap(data_.data() + offset(n, c, 0, 0), shape_.height, shape_.width);
  }

  /// C x (H*W) view of batch item n; a 1x1 convolution is one product on it.
  MatrixMap channels(Index n) {
    return MatrixMap(data_.data() + offset(n, 0, 0, 0), shape_.channels, shape_.plane_size());
  }
  ConstMatrixMap channels(Index n) const {
    return ConstMatrixMap(data_.data() + offset(n, 0, 0, 0), shape_.channels,
                          shape_.plane_size());
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](Scalar v) { return std::isfinite(v); });
  }

  template <typename Other>
  TensorT<Other> cast() const {
    TensorT<Other> out(shape_);
    out.flat() = flat().template cast<Other>();
    return out;
  }

  friend bool operator==(const TensorT& a, const TensorT& b) {
    return a.shape_ == b.shape_ && std::equal(a.data_.begin(), a.data_.end(), b.data_.begin());
  }

 private:
  static Index checked_size(const Shape& s) {
    if (s.batch < 0 || s.channels < 0 || s.height < 0 || s.width < 0)
      throw ShapeMismatch("negative dimension in " + to_string(s));
    return s.size();
  }

  Index offset(Index n, Index c, Index h, Index w) const {
    return ((n * shape_.channels + c) * shape_.height + h) * shape_.width + w;
  }

  Shape shape_{};
  Storage data_;
};

using Tensor = TensorT<double>;

/// Largest absolute element-wise difference; shapes must agree.
template <typename Scalar>
Scalar max_abs_diff(const TensorT<Scalar>& a, const TensorT<Scalar>& b) {
  if (a.shape() != b.shape())
    throw ShapeMismatch("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  if (a.size() == 0) return Scalar(0);
  return (a.flat() - b.flat()).cwiseAbs().maxCoeff();
}

/// Channels [first, first+count) of t.
template <typename Scalar>
TensorT<Scalar> slice_channels(const TensorT<Scalar>& t, Index first, Index count) {
  const Shape& s = t.shape();
  if (first < 0 || count < 0 || first + count > s.channels)
    throw ShapeMismatch("slice_channels out of range for " + to_string(s));
  TensorT<Scalar> out({s.batch, count, s.height, s.width});
  for (Index n = 0; n < s.batch; ++n)
    out.channels(n) = t.channels(n).middleRows(first, count);
  return out;
}

}  // namespace slam3d
