#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slam3d/grad_check.hpp"

namespace slam3d {

struct GradCase {
  std::string name;
  Differentiable fn;
  std::vector<Tensor> inputs;
};

/// One seeded case per kernel plus fuse for each strategy (1x8x4x4 features,
/// 1x1x8x8 prior). Outputs are wrapped in a fixed random weighting.
std::vector<GradCase> gradcheck_cases(std::uint64_t seed);

/// Backward scaled by (1 + amount); a test hook that must make checks fail.
Differentiable corrupt_backward(Differentiable fn, double amount = 1e-2);

struct GradSuiteResult {
  std::vector<std::pair<std::string, double>> worst;  // per case name, over trials
  double max_error() const;
};

GradSuiteResult run_gradcheck_suite(int trials, std::uint64_t seed, bool corrupt = false);

}  // namespace slam3d
