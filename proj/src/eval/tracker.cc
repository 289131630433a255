#include "mirlab/eval/tracker.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"
#include "mirlab/numerics/tensor.h"
#include "mirlab/sim/render.h"

namespace mirlab::eval {

CemConfig CemConfig::per_step(int population, int elites, int iterations, int horizon) {
  CemConfig c;
  c.population = population;
  c.elites = elites;
  c.iterations = iterations;
  c.horizon = horizon;
  c.segments = horizon;
  c.execute_steps = 1;
  return c;
}

void validate(const CemConfig& c) {
  if (c.population < 1) throw ContractError("cem: population must be positive");
  if (c.elites < 1 || c.elites > c.population) throw ContractError("cem: elites must lie in [1, population]");
  if (c.iterations < 1) throw ContractError("cem: iterations must be positive");
  if (c.horizon < 1) throw ContractError("cem: horizon must be positive");
  if (c.segments < 1 || c.horizon % c.segments != 0) {
    throw ContractError("cem: segments must divide the horizon");
  }
  if (c.execute_steps < 1 || c.execute_steps > c.horizon) {
    throw ContractError("cem: execute_steps must lie in [1, horizon]");
  }
  if (!(c.init_std > 0.0) || !(c.min_std >= 0.0)) throw ContractError("cem: standard deviations must be positive");
  if (c.budget < 0) throw ContractError("cem: budget must be non-negative");
}

AgentCamera::AgentCamera(const repr::FrozenEncoder& encoder) : encoder_(encoder), domain_(sim::canonical_domain()) {}

void AgentCamera::embed(const sim::SimState& state, std::span<double> out) const {
  thread_local std::vector<std::uint8_t> pixels(sim::kObservationBytes);
  for (std::size_t v = 0; v < sim::kViews; ++v) {
    // The canonical domain is noise free, so the frame seed is irrelevant.
    sim::render_view(state, domain_, v, 0, std::span<std::uint8_t>(pixels).subspan(v * sim::kViewPixels, sim::kViewPixels));
  }
  encoder_.embed(pixels, out);
}

std::vector<double> AgentCamera::embed(const sim::SimState& state) const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  embed(state, out);
  return out;
}

int advance_goals(GoalSequence& goals, std::span<const double> embedding) {
  int advanced = 0;
  while (!goals.done() && reward(embedding, goals.active(), goals.w, goals.epsilon) == 1) {
    ++goals.active_index;
    ++advanced;
  }
  return advanced;
}

namespace {

constexpr int kParams = 3;  // vx, vy, grip per segment

sim::Action segment_action(std::span<const double> plan, int segment) {
  const auto i = static_cast<std::size_t>(segment * kParams);
  return sim::Action{{plan[i], plan[i + 1]}, plan[i + 2]};
}

struct Rollout {
  sim::SimState state;
  sim::StageTracker stages;
  GoalSequence goals;
  TrackResult result;
  std::vector<double> emb;

  Rollout(const sim::SimState& start, const sim::TaskSpec& task, GoalSequence g, int dim)
      : state(start), stages(task), goals(std::move(g)), emb(static_cast<std::size_t>(dim)) {
    stages.observe(state);
    result.goals_total = goals.size();
  }

  // Checks the reward on the current frame and records any advance.
  void observe(const AgentCamera& camera) {
    camera.embed(state, emb);
    const int n = advance_goals(goals, emb);
    for (int i = 0; i < n; ++i) result.reach_steps.push_back(result.steps);
  }

  void act(const sim::Action& a) {
    state = sim::step(state, a);
    stages.observe(state);
    ++result.steps;
  }

  TrackResult finish() {
    result.goals_reached = goals.active_index;
    result.all_reached = goals.done();
    result.lifted = stages.lifted();
    result.stacked = stages.stacked();
    result.final_state = state;
    return result;
  }
};

double score_candidate(const sim::SimState& start, const GoalSequence& goals, std::span<const double> plan,
                       const CemConfig& cfg, const AgentCamera& camera, std::span<double> emb) {
  sim::SimState s = start;
  GoalSequence g = goals;
  int newly = 0;
  const int seg_len = cfg.horizon / cfg.segments;
  for (int seg = 0; seg < cfg.segments; ++seg) {
    const auto a = segment_action(plan, seg);
    for (int k = 0; k < seg_len; ++k) s = sim::step(s, a);
    camera.embed(s, emb);
    newly += advance_goals(g, emb);
  }
  const double tie = g.done() ? 0.0 : squared_distance(emb, g.active());
  return static_cast<double>(newly) * 1e9 - tie;
}

}  // namespace

TrackResult track_cem(const sim::SimState& start, const sim::TaskSpec& task, const repr::FrozenEncoder& encoder,
                      GoalSequence goals, const CemConfig& cfg, int demo_length, std::uint64_t seed) {
  validate(cfg);
  const int budget = cfg.budget > 0 ? cfg.budget : 3 * demo_length;
  const AgentCamera camera(encoder);
  Rollout r(start, task, std::move(goals), camera.dim());
  Rng rng(seed);
  const auto dims = static_cast<std::size_t>(cfg.segments * kParams);
  const int seg_len = cfg.horizon / cfg.segments;
  std::vector<double> mean(dims, 0.0), stddev(dims, cfg.init_std);
  std::vector<double> samples(static_cast<std::size_t>(cfg.population) * dims);
  std::vector<double> scores(static_cast<std::size_t>(cfg.population));
  std::vector<double> best(dims), emb(static_cast<std::size_t>(camera.dim()));
  std::vector<std::size_t> order(static_cast<std::size_t>(cfg.population));

  r.observe(camera);
  while (!r.goals.done() && r.result.steps < budget) {
    double best_score = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.iterations; ++it) {
      for (int p = 0; p < cfg.population; ++p) {
        auto cand = std::span<double>(samples).subspan(static_cast<std::size_t>(p) * dims, dims);
        for (std::size_t i = 0; i < dims; ++i) cand[i] = std::clamp(rng.normal(mean[i], stddev[i]), -1.0, 1.0);
        scores[static_cast<std::size_t>(p)] = score_candidate(r.state, r.goals, cand, cfg, camera, emb);
        if (scores[static_cast<std::size_t>(p)] > best_score) {
          best_score = scores[static_cast<std::size_t>(p)];
          std::ranges::copy(cand, best.begin());
        }
      }
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      for (std::size_t i = 0; i < dims; ++i) {
        double m = 0.0, v = 0.0;
        for (int e = 0; e < cfg.elites; ++e) m += samples[order[static_cast<std::size_t>(e)] * dims + i];
        m /= cfg.elites;
        for (int e = 0; e < cfg.elites; ++e) {
          const double d = samples[order[static_cast<std::size_t>(e)] * dims + i] - m;
          v += d * d;
        }
        mean[i] = m;
        stddev[i] = std::max(std::sqrt(v / cfg.elites), cfg.min_std);
      }
    }
    // Execute the head of the best plan, stopping as soon as every goal is met.
    for (int k = 0; k < cfg.execute_steps && !r.goals.done() && r.result.steps < budget; ++k) {
      r.act(segment_action(best, k / seg_len));
      r.observe(camera);
    }
    // Warm start: shift the mean by the executed segments, reset the spread.
    const auto shift = static_cast<std::size_t>(cfg.execute_steps / seg_len) * kParams;
    std::vector<double> next(dims, 0.0);
    for (std::size_t i = shift; i < dims; ++i) next[i - shift] = best[i];
    mean = next;
    std::fill(stddev.begin(), stddev.end(), cfg.init_std);
  }
  return r.finish();
}

TrackResult track_policy(const sim::SimState& start, const sim::TaskSpec& task, const repr::FrozenEncoder& encoder,
                         const repr::Mlp& policy, GoalSequence goals, int budget) {
  if (budget < 0) throw ContractError("track_policy: budget must be non-negative");
  if (policy.in_dim() != 2 * encoder.embed_dim() || policy.out_dim() != 3) {
    throw ShapeError("track_policy: policy must map [obs, goal] embeddings to 3 action values");
  }
  const AgentCamera camera(encoder);
  Rollout r(start, task, std::move(goals), camera.dim());
  const auto d = static_cast<std::size_t>(camera.dim());
  r.observe(camera);
  while (!r.goals.done() && r.result.steps < budget) {
    std::vector<double> in(2 * d);
    std::ranges::copy(r.emb, in.begin());
    std::ranges::copy(r.goals.active(), in.begin() + static_cast<long>(d));
    const auto out = policy.forward(numerics::Tensor::from_data({1, 2 * d}, std::move(in)));
    const auto a = out.data();
    r.act(sim::Action{{a[0], a[1]}, a[2]});
    r.observe(camera);
  }
  return r.finish();
}

TrackResult track_random(const sim::SimState& start, const sim::TaskSpec& task, const repr::FrozenEncoder& encoder,
                         GoalSequence goals, int budget, std::uint64_t seed) {
  if (budget < 0) throw ContractError("track_random: budget must be non-negative");
  const AgentCamera camera(encoder);
  Rollout r(start, task, std::move(goals), camera.dim());
  Rng rng(seed);
  r.observe(camera);
  while (!r.goals.done() && r.result.steps < budget) {
    const double vx = rng.uniform(-1.0, 1.0), vy = rng.uniform(-1.0, 1.0), grip = rng.uniform(-1.0, 1.0);
    r.act(sim::Action{{vx, vy}, grip});
    r.observe(camera);
  }
  return r.finish();
}

}  // namespace mirlab::eval
