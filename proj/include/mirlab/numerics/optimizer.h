#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirlab/numerics/tensor.h"

namespace mirlab::numerics {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

OptimizerState make_adam_state(std::span<const NamedParameter> params, AdamConfig config = {});

// One bias-corrected Adam update using each parameter's current gradient
// (a parameter without a gradient is treated as having a zero gradient).
// Throws NumericError naming the first parameter whose gradient is not
// finite; in that case nothing is modified.
void adam_step(std::span<NamedParameter> params, OptimizerState& state);

}  // namespace mirlab::numerics
