#include "mirlab/eval/imitation.h"

#include <cmath>

#include "mirlab/common/errors.h"
#include "mirlab/common/parallel.h"
#include "mirlab/common/rng.h"
#include "mirlab/eval/metrics.h"

namespace mirlab::eval {

int ImitationResult::attempts() const {
  int n = 0;
  for (const auto& d : demos) n += d.attempts;
  return n;
}

double ImitationResult::lift_rate() const {
  int n = 0;
  for (const auto& d : demos) n += d.lifts;
  return attempts() > 0 ? static_cast<double>(n) / attempts() : 0.0;
}

double ImitationResult::stack_rate() const {
  int n = 0;
  for (const auto& d : demos) n += d.stacks;
  return attempts() > 0 ? static_cast<double>(n) / attempts() : 0.0;
}

sim::SimState jittered_start(const sim::SimState& initial, double jitter, std::uint64_t seed) {
  if (!(jitter >= 0.0)) throw ContractError("jittered_start: jitter must be non-negative");
  Rng rng(seed);
  for (int draw = 0; draw < 20; ++draw) {
    sim::SimState s = initial;
    for (auto& o : s.objects) {
      o.pos.x = std::clamp(o.pos.x + rng.uniform(-jitter, jitter), o.half_size, 1.0 - o.half_size);
    }
    s.gripper.x = std::clamp(s.gripper.x + rng.uniform(-jitter, jitter), 0.0, 1.0);
    s.gripper.y = std::clamp(s.gripper.y + rng.uniform(-jitter, jitter), 0.0, 1.0);
    bool clear = true;
    for (std::size_t i = 0; i < s.objects.size() && clear; ++i) {
      for (std::size_t j = i + 1; j < s.objects.size() && clear; ++j) {
        const double need = s.objects[i].half_size + s.objects[j].half_size;
        clear = std::abs(s.objects[i].pos.x - s.objects[j].pos.x) >= need;
      }
    }
    if (clear) return s;
  }
  return initial;
}

std::uint64_t attempt_seed(std::uint64_t seed, int demo_id, int attempt) {
  return mix_seed(mix_seed(mix_seed(seed, 0x1417), static_cast<std::uint64_t>(demo_id)),
                  static_cast<std::uint64_t>(attempt));
}

ImitationResult imitation_eval(const std::string& method, const repr::FrozenEncoder& encoder,
                               const std::vector<Demo>& demos, const ImitationConfig& cfg,
                               const repr::Mlp* policy) {
  if (cfg.attempts < 1) throw ContractError("imitation_eval: attempts must be positive");
  if (demos.empty()) throw ContractError("imitation_eval: no demos");
  if (cfg.tracker == TrackerKind::kPolicy && policy == nullptr) {
    throw ContractError("imitation_eval: the policy tracker needs a policy head");
  }
  validate(cfg.cem);
  ImitationResult out;
  out.method = method;
  out.domain = demos.front().domain;

  std::vector<GoalSequence> goals;
  for (const auto& d : demos) {
    const auto emb = embed_frames(encoder, d.frames);
    goals.push_back(sample_goals(emb, encoder.embed_dim(), cfg.stride, cfg.epsilon));
  }
  const auto A = static_cast<std::size_t>(cfg.attempts);
  std::vector<TrackResult> results(demos.size() * A);
  parallel_for(results.size(), [&](std::size_t i) {
    const auto& d = demos[i / A];
    const auto seed = attempt_seed(cfg.seed, d.id, static_cast<int>(i % A));
    const auto start = jittered_start(d.initial, cfg.jitter, mix_seed(seed, 1));
    const int budget = cfg.cem.budget > 0 ? cfg.cem.budget : 3 * d.length;
    switch (cfg.tracker) {
      case TrackerKind::kCem:
        results[i] = track_cem(start, d.task(), encoder, goals[i / A], cfg.cem, d.length, mix_seed(seed, 2));
        break;
      case TrackerKind::kPolicy:
        results[i] = track_policy(start, d.task(), encoder, *policy, goals[i / A], budget);
        break;
      case TrackerKind::kRandom:
        results[i] = track_random(start, d.task(), encoder, goals[i / A], budget, mix_seed(seed, 2));
        break;
    }
  });

  for (std::size_t k = 0; k < demos.size(); ++k) {
    DemoOutcome o;
    o.demo_id = demos[k].id;
    o.attempts = cfg.attempts;
    o.goals_total = goals[k].size();
    o.goals_histogram.assign(static_cast<std::size_t>(o.goals_total) + 1, 0);
    double reached = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      const auto& r = results[k * A + a];
      o.lifts += r.lifted ? 1 : 0;
      o.stacks += r.stacked ? 1 : 0;
      reached += r.goals_reached;
      o.goals_histogram[static_cast<std::size_t>(r.goals_reached)] += 1;
    }
    o.mean_goals_reached = reached / static_cast<double>(A);
    out.demos.push_back(std::move(o));
  }
  return out;
}

}  // namespace mirlab::eval
