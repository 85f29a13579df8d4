#pragma once

#include <functional>
#include <vector>

#include "slam3d/tensor.hpp"

namespace slam3d {

/// A function of several tensors together with its analytic vector-Jacobian
/// product. backward(inputs, upstream) returns one gradient per input, shaped
/// like that input.
struct Differentiable {
  std::function<Tensor(const std::vector<Tensor>&)> forward;
  std::function<std::vector<Tensor>(const std::vector<Tensor>&, const Tensor&)> backward;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  Index worst_element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares the analytic gradient of sum(fn(inputs)) against central
/// differences with step h, element by element. Relative error uses the
/// denominator max(|analytic|, |numeric|, 1e-8).
GradCheckReport grad_check_report(const Differentiable& fn, const std::vector<Tensor>& inputs,
                                  double h = 1e-5);

inline double grad_check(const Differentiable& fn, const std::vector<Tensor>& inputs, double h = 1e-5) {
  return grad_check_report(fn, inputs, h).max_relative_error;
}

/// fn(x) * weights element-wise. A plain sum of outputs is degenerate for
/// some kernels (standardized outputs always sum to zero), so checks wrap the
/// kernel in a fixed random weighting.
Differentiable weighted(Differentiable fn, Tensor weights);

}  // namespace slam3d
