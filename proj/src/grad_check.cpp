#include "slam3d/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace slam3d {

GradCheckReport grad_check_report(const Differentiable& fn, const std::vector<Tensor>& inputs, double h) {
  if (!(h > 0)) throw Error("grad_check: step must be positive");
  const Tensor out = fn.forward(inputs);
  const auto analytic = fn.backward(inputs, Tensor::constant(out.shape(), 1.0));
  if (analytic.size() != inputs.size()) throw ShapeMismatch("grad_check: one gradient per input expected");

  GradCheckReport report;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (analytic[k].shape() != inputs[k].shape())
      throw ShapeMismatch("grad_check: gradient " + std::to_string(k) + " has shape " +
                          to_string(analytic[k].shape()) + ", input " + to_string(inputs[k].shape()));
    auto x = probe[k].data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + h;
      const Tensor plus = fn.forward(probe);
      x[i] = saved - h;
      const Tensor minus = fn.forward(probe);
      x[i] = saved;
      // Difference per output element first: outputs the element does not
      // touch cancel exactly instead of adding rounding noise to a big sum.
      const double numeric = (plus.flat() - minus.flat()).sum() / (2.0 * h);
      const double a = analytic[k].data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_relative_error || (k == 0 && i == 0)) {
        report = {rel, k, static_cast<Index>(i), a, numeric};
      }
    }
  }
  return report;
}

Differentiable weighted(Differentiable fn, Tensor weights) {
  Differentiable out;
  out.forward = [f = fn.forward, weights](const std::vector<Tensor>& in) {
    Tensor y = f(in);
    if (y.shape() != weights.shape())
      throw ShapeMismatch("weighted: output " + to_string(y.shape()) + " vs weights " +
                          to_string(weights.shape()));
    y.flat().array() *= weights.flat().array();
    return y;
  };
  out.backward = [b = fn.backward, weights](const std::vector<Tensor>& in, const Tensor& upstream) {
    Tensor g = upstream;
    g.flat().array() *= weights.flat().array();
    return b(in, g);
  };
  return out;
}

}  // namespace slam3d
