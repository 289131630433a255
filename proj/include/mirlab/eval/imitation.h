#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mirlab/eval/demos.h"
#include "mirlab/eval/tracker.h"

namespace mirlab::eval {

enum class TrackerKind : std::uint8_t { kCem, kPolicy, kRandom };

struct ImitationConfig {
  int attempts = 100;
  int stride = kDefaultStride;
  double epsilon = kDefaultEpsilon;
  double jitter = 0.02;  // start perturbation, fraction of the unit workspace
  TrackerKind tracker = TrackerKind::kCem;
  CemConfig cem;
  std::uint64_t seed = 0;
};

struct DemoOutcome {
  int demo_id = 0;
  int attempts = 0;
  int lifts = 0;
  int stacks = 0;
  double mean_goals_reached = 0.0;
  int goals_total = 0;
  std::vector<int> goals_histogram;  // attempts that reached exactly k goals, k = 0..goals_total

  double lift_rate() const { return attempts > 0 ? static_cast<double>(lifts) / attempts : 0.0; }
  double stack_rate() const { return attempts > 0 ? static_cast<double>(stacks) / attempts : 0.0; }
};

struct ImitationResult {
  std::string method;
  sim::DomainKind domain = sim::DomainKind::kInvisibleArm;
  std::vector<DemoOutcome> demos;

  int attempts() const;
  double lift_rate() const;
  double stack_rate() const;
};

// The demo's initial state with every object shifted horizontally and the
// gripper shifted in both axes by U(-jitter, jitter), redrawn until objects do
// not overlap (up to 20 draws, then unperturbed).
sim::SimState jittered_start(const sim::SimState& initial, double jitter, std::uint64_t seed);

// Seed of one attempt; shared by all methods so comparisons are paired.
std::uint64_t attempt_seed(std::uint64_t seed, int demo_id, int attempt);

// For every demo and attempt: reset to the jittered demo start, embed the
// demo frames as goals, track them in the canonical domain and record the
// episode's lift/stack stages. Attempts run concurrently; the result does not
// depend on scheduling. `policy` is required for TrackerKind::kPolicy.
ImitationResult imitation_eval(const std::string& method, const repr::FrozenEncoder& encoder,
                               const std::vector<Demo>& demos, const ImitationConfig& config,
                               const repr::Mlp* policy = nullptr);

}  // namespace mirlab::eval
