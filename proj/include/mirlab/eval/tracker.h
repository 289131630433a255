#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mirlab/eval/goals.h"
#include "mirlab/repr/encoder.h"
#include "mirlab/repr/frozen.h"
#include "mirlab/sim/domain.h"
#include "mirlab/sim/world.h"

namespace mirlab::eval {

// Receding-horizon cross-entropy planner over the canonical simulator. Each
// candidate is a piecewise-constant action sequence: `segments` blocks of
// (vx, vy, grip) covering `horizon` steps. Candidates are scored by the
// number of goals they newly reach (checked at every segment boundary) and
// then by -||phi(o_H) - g_active||^2. The best candidate's first
// `execute_steps` steps are executed, then the planner replans from the new
// state with its mean shifted forward.
struct CemConfig {
  int population = 16;
  int elites = 6;
  int iterations = 2;
  int horizon = 10;
  int segments = 1;
  int execute_steps = 10;
  double init_std = 0.8;
  double min_std = 0.05;
  int budget = 0;  // steps; 0 means 3 x demo length

  // One action per step, replanning after every step.
  static CemConfig per_step(int population, int elites, int iterations, int horizon);
};

void validate(const CemConfig& config);

struct TrackResult {
  int goals_total = 0;
  int goals_reached = 0;
  int steps = 0;
  bool all_reached = false;
  bool lifted = false;   // latched over the rollout
  bool stacked = false;  // at the final state
  std::vector<int> reach_steps;  // step at which each reached goal was met
  sim::SimState final_state;
};

// Encodes canonical renders of simulator states for the agent.
class AgentCamera {
 public:
  explicit AgentCamera(const repr::FrozenEncoder& encoder);
  void embed(const sim::SimState& state, std::span<double> out) const;
  std::vector<double> embed(const sim::SimState& state) const;
  int dim() const { return encoder_.embed_dim(); }

 private:
  const repr::FrozenEncoder& encoder_;
  sim::DomainSpec domain_;
};

// Advances goals.active_index while the embedding earns reward; returns the
// number of goals advanced.
int advance_goals(GoalSequence& goals, std::span<const double> embedding);

TrackResult track_cem(const sim::SimState& start, const sim::TaskSpec& task, const repr::FrozenEncoder& encoder,
                      GoalSequence goals, const CemConfig& config, int demo_length, std::uint64_t seed);

// Closed-loop policy tracking: a = pi(phi(o), g_active) each step with the
// same goal advancement and budget.
TrackResult track_policy(const sim::SimState& start, const sim::TaskSpec& task, const repr::FrozenEncoder& encoder,
                         const repr::Mlp& policy, GoalSequence goals, int budget);

// Uniformly random actions (seeded), same goal advancement and budget.
TrackResult track_random(const sim::SimState& start, const sim::TaskSpec& task, const repr::FrozenEncoder& encoder,
                         GoalSequence goals, int budget, std::uint64_t seed);

}  // namespace mirlab::eval
