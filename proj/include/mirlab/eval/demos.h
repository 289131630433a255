#pragma once

#include <cstdint>
#include <vector>

#include "mirlab/sim/domain.h"
#include "mirlab/sim/render.h"
#include "mirlab/sim/world.h"

namespace mirlab::eval {

// A held-out demonstration: one scripted stacking episode rendered in the
// demonstrator's domain, plus the same states rendered canonically (used as
// the agent-side reference in the reachability analysis).
struct Demo {
  int id = 0;
  int task_id = 0;
  std::uint64_t seed = 0;
  int length = 0;
  sim::DomainKind domain = sim::DomainKind::kInvisibleArm;
  sim::DomainSpec spec;
  sim::SimState initial;
  std::vector<std::uint8_t> frames;            // length x kObservationBytes, demo domain
  std::vector<std::uint8_t> canonical_frames;  // same states, canonical domain

  sim::TaskSpec task() const { return sim::all_tasks()[static_cast<std::size_t>(task_id)]; }
};

// Demo `id` of a demo set: task id % 6, scripted with the demo domain's
// dynamics and re-seeded until the episode ends stacked. The underlying seed
// does not depend on the domain, so demo i shows the same task and start in
// every domain. Throws std::runtime_error if 50 seeds fail.
Demo make_demo(sim::DomainKind domain, int id, std::uint64_t seed, int length = sim::kEpisodeLength);
std::vector<Demo> make_demos(sim::DomainKind domain, int count, std::uint64_t seed,
                             int length = sim::kEpisodeLength);

// The demonstration domains used by the imitation benchmark.
std::vector<sim::DomainKind> demo_domains();

}  // namespace mirlab::eval
