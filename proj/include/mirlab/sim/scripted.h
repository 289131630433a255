#pragma once

#include <cstdint>

#include "mirlab/sim/world.h"

namespace mirlab::sim {

struct ScriptParams {
  double speed = 0.35;         // velocity cap used by the controller
  double carry_height = 0.42;  // object center height while transporting
  double align_tol = 0.006;
};

// Per-episode variation of the demonstrator's speed and carry height.
ScriptParams sample_script_params(std::uint64_t seed);

// Finite-state stacking controller: move above the top object, descend, close,
// lift to carry height, move above the bottom object, descend to stack height,
// open, retreat. The stage is inferred from the state alone. Outputs are
// always within [-1, 1].
Action scripted_policy(const SimState& state, const TaskSpec& task, const ScriptParams& params = {},
                       const Dynamics& dyn = {});

}  // namespace mirlab::sim
