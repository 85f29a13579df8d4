#include "slam3d/gradcheck_suite.hpp"

#include <algorithm>

#include "slam3d/fusion.hpp"
#include "slam3d/rng.hpp"

namespace slam3d {

namespace {

Tensor random_tensor(Rng& rng, Shape s) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

Conv1x1Params<double> unpack_conv(const Tensor& w, const Tensor& b) {
  Conv1x1Params<double> p;
  p.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      w.data().data(), w.shape().height, w.shape().width);
  p.bias = b.flat();
  return p;
}

Tensor pack_matrix(const Eigen::MatrixXd& m) {
  Tensor t({1, 1, m.rows(), m.cols()});
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(t.data().data(), m.rows(),
                                                                                    m.cols()) = m;
  return t;
}

Tensor pack_vector(const Eigen::VectorXd& v) {
  Tensor t({1, 1, 1, v.size()});
  t.flat() = v;
  return t;
}

GradCase make_case(std::string name, Differentiable fn, std::vector<Tensor> inputs, Rng& rng) {
  const Tensor out = fn.forward(inputs);
  return {std::move(name), weighted(std::move(fn), random_tensor(rng, out.shape())), std::move(inputs)};
}

}  // namespace

std::vector<GradCase> gradcheck_cases(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCase> cases;

  {
    Differentiable d;
    d.forward = [](const std::vector<Tensor>& in) { return bilinear_upsample(in[0], 7, 9); };
    d.backward = [](const std::vector<Tensor>& in, const Tensor& up) {
      return std::vector<Tensor>{bilinear_upsample_backward(in[0].shape(), up)};
    };
    cases.push_back(make_case("bilinear_upsample", d, {random_tensor(rng, {1, 2, 3, 4})}, rng));
  }
  {
    Differentiable d;
    d.forward = [](const std::vector<Tensor>& in) { return standardize(in[0]); };
    d.backward = [](const std::vector<Tensor>& in, const Tensor& up) {
      return std::vector<Tensor>{standardize_backward(in[0], up, kDefaultEps)};
    };
    cases.push_back(make_case("standardize", d, {random_tensor(rng, {1, 3, 4, 4})}, rng));
  }
  {
    Differentiable d;
    d.forward = [](const std::vector<Tensor>& in) { return eltwise_mul(in[0], in[1]); };
    d.backward = [](const std::vector<Tensor>& in, const Tensor& up) {
      auto g = eltwise_mul_backward(in[0], in[1], up);
      return std::vector<Tensor>{std::move(g.a), std::move(g.b)};
    };
    cases.push_back(
        make_case("eltwise_mul", d, {random_tensor(rng, {1, 3, 4, 4}), random_tensor(rng, {1, 1, 4, 4})}, rng));
  }
  {
    Differentiable d;
    d.forward = [](const std::vector<Tensor>& in) { return concat_channels(in[0], in[1]); };
    d.backward = [](const std::vector<Tensor>& in, const Tensor& up) {
      auto g = concat_channels_backward(in[0].shape().channels, up);
      return std::vector<Tensor>{std::move(g.a), std::move(g.b)};
    };
    cases.push_back(make_case("concat_channels", d,
                              {random_tensor(rng, {1, 3, 4, 4}), random_tensor(rng, {1, 1, 4, 4})}, rng));
  }
  {
    Differentiable d;
    d.forward = [](const std::vector<Tensor>& in) { return conv1x1(in[0], unpack_conv(in[1], in[2])); };
    d.backward = [](const std::vector<Tensor>& in, const Tensor& up) {
      auto g = conv1x1_backward(in[0], unpack_conv(in[1], in[2]), up);
      return std::vector<Tensor>{std::move(g.input), pack_matrix(g.params.weight), pack_vector(g.params.bias)};
    };
    cases.push_back(make_case(
        "conv1x1", d, {random_tensor(rng, {1, 4, 3, 3}), random_tensor(rng, {1, 1, 5, 4}), random_tensor(rng, {1, 1, 1, 5})},
        rng));
  }
  {
    Differentiable d;
    d.forward = [](const std::vector<Tensor>& in) {
      return logistic_gate(in[0], in[1], in[2].data()[0], in[2].data()[1]);
    };
    d.backward = [](const std::vector<Tensor>& in, const Tensor& up) {
      auto g = logistic_gate_backward(in[0], in[1], in[2].data()[0], in[2].data()[1], up);
      return std::vector<Tensor>{std::move(g.features), std::move(g.prior), Tensor({1, 1, 1, 2}, {g.scale, g.offset})};
    };
    cases.push_back(make_case("logistic_gate", d,
                              {random_tensor(rng, {1, 3, 4, 4}), random_tensor(rng, {1, 1, 4, 4}),
                               Tensor({1, 1, 1, 2}, {rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)})},
                              rng));
  }
  for (auto strategy : {FusionStrategy::Multiply, FusionStrategy::Concat, FusionStrategy::Attention}) {
    FusionConfig cfg;
    cfg.strategy = strategy;
    cfg.out_channels = 8;
    cfg.seed = rng.next();
    const auto params = make_fusion_params(cfg, 8);
    Tensor features = random_tensor(rng, {1, 8, 4, 4});
    Tensor prior = random_tensor(rng, {1, 1, 8, 8});
    cases.push_back(make_case("fuse/" + std::string(to_string(strategy)), fuse_differentiable(cfg),
                              pack_fuse_inputs(features, prior, params), rng));
  }
  return cases;
}

Differentiable corrupt_backward(Differentiable fn, double amount) {
  Differentiable d;
  d.forward = fn.forward;
  d.backward = [inner = fn.backward, amount](const std::vector<Tensor>& in, const Tensor& up) {
    auto grads = inner(in, up);
    for (auto& g : grads) g.flat() *= 1.0 + amount;
    return grads;
  };
  return d;
}

double GradSuiteResult::max_error() const {
  double m = 0.0;
  for (const auto& [name, e] : worst) m = std::max(m, e);
  return m;
}

GradSuiteResult run_gradcheck_suite(int trials, std::uint64_t seed, bool corrupt) {
  GradSuiteResult r;
  for (int t = 0; t < trials; ++t) {
    auto cases = gradcheck_cases(derive_seed(seed, static_cast<std::uint64_t>(t)));
    if (r.worst.empty())
      for (const auto& c : cases) r.worst.emplace_back(c.name, 0.0);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto fn = corrupt ? corrupt_backward(cases[i].fn) : cases[i].fn;
      r.worst[i].second = std::max(r.worst[i].second, grad_check(fn, cases[i].inputs));
    }
  }
  return r;
}

}  // namespace slam3d
