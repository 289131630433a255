#include "mirlab/sim/world.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"

namespace mirlab::sim {

namespace {

constexpr std::array<ShapeTag, kNumObjects> kShapes = {ShapeTag::kSquare, ShapeTag::kCircle, ShapeTag::kTriangle};
constexpr double kHalfSize = 0.07;
constexpr double kPlacementMargin = 0.04;

double clamp01(double v, double lo = 0.0, double hi = 1.0) { return std::clamp(v, lo, hi); }

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::array<TaskSpec, 6> all_tasks() {
  return {TaskSpec{0, 1}, TaskSpec{0, 2}, TaskSpec{1, 0}, TaskSpec{1, 2}, TaskSpec{2, 0}, TaskSpec{2, 1}};
}

Action clamp_action(const Action& a) {
  Action out;
  out.velocity = {std::clamp(a.velocity.x, -1.0, 1.0), std::clamp(a.velocity.y, -1.0, 1.0)};
  out.grip_command = std::clamp(a.grip_command, -1.0, 1.0);
  return out;
}

SimState reset(const TaskSpec& task, std::uint64_t seed) {
  if (task.top == task.bottom || task.top < 0 || task.top >= kNumObjects || task.bottom < 0 ||
      task.bottom >= kNumObjects) {
    throw ContractError("reset: task must name two distinct object colors");
  }
  Rng rng(mix_seed(seed, 0x5eed));
  SimState s;
  s.objects.resize(kNumObjects);
  bool placed = false;
  for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
    for (int c = 0; c < kNumObjects; ++c) {
      auto& o = s.objects[c];
      o.half_size = kHalfSize;
      o.shape = kShapes[c];
      o.color_id = c;
      o.pos = {rng.uniform(0.1, 0.9), kHalfSize};
    }
    placed = true;
    for (int i = 0; i < kNumObjects && placed; ++i) {
      for (int j = i + 1; j < kNumObjects && placed; ++j) {
        const double need = s.objects[i].half_size + s.objects[j].half_size + kPlacementMargin;
        if (std::abs(s.objects[i].pos.x - s.objects[j].pos.x) < need) placed = false;
      }
    }
  }
  if (!placed) throw PlacementError("reset: no non-overlapping layout after 100 samples");
  s.gripper = {rng.uniform(0.1, 0.9), rng.uniform(0.5, 0.9)};
  return s;
}

double support_height(const SimState& state, int k, double x) {
  const auto& obj = state.objects[k];
  double h = obj.half_size;
  for (int j = 0; j < static_cast<int>(state.objects.size()); ++j) {
    if (j == k) continue;
    const auto& other = state.objects[j];
    if (other.pos.y > obj.pos.y) continue;
    if (std::abs(other.pos.x - x) >= obj.half_size + other.half_size) continue;
    h = std::max(h, other.pos.y + other.half_size + obj.half_size);
  }
  return h;
}

bool is_resting(const SimState& state, int k, const Dynamics& dyn) {
  if (state.held_object == k) return false;
  const auto& obj = state.objects[k];
  return std::abs(obj.pos.y - support_height(state, k, obj.pos.x)) <= dyn.contact_tol;
}

SimState step(const SimState& state, const Action& raw, const Dynamics& dyn) {
  const Action a = clamp_action(raw);
  SimState next = state;
  next.time_step += 1;

  if (a.grip_command > 0.0 && !next.grip_closed) {
    next.grip_closed = true;
    int best = -1;
    double best_d = 0.0;
    for (int k = 0; k < static_cast<int>(next.objects.size()); ++k) {
      const auto& o = next.objects[k];
      const double d = distance(o.pos, next.gripper);
      if (d <= dyn.grasp_radius_scale * o.half_size && (best < 0 || d < best_d)) {
        best = k;
        best_d = d;
      }
    }
    if (best >= 0) next.held_object = best;
  } else if (a.grip_command < 0.0 && next.grip_closed) {
    next.grip_closed = false;
    next.held_object.reset();
  }

  Vec2 g{clamp01(next.gripper.x + a.velocity.x * dyn.dt), clamp01(next.gripper.y + a.velocity.y * dyn.dt)};
  if (next.held_object) {
    const int k = *next.held_object;
    const double hs = next.objects[k].half_size;
    g.x = clamp01(g.x, hs, 1.0 - hs);
    g.y = clamp01(g.y, hs, 1.0 - hs);
    // The held object may not sink into the floor or into objects below it.
    next.objects[k].pos = g;
    g.y = std::max(g.y, support_height(next, k, g.x));
    next.objects[k].pos = g;
  }
  next.gripper = g;

  std::vector<int> order(next.objects.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return next.objects[i].pos.y < next.objects[j].pos.y; });
  for (int k : order) {
    if (next.held_object == k) continue;
    auto& o = next.objects[k];
    const double floor_h = support_height(next, k, o.pos.x);
    o.pos.y = std::max(o.pos.y - dyn.gravity * dyn.dt, floor_h);
  }
  return next;
}

StagePredicates success_predicates(const SimState& state, const TaskSpec& task, const Dynamics& dyn) {
  StagePredicates p;
  const auto& top = state.objects[task.top];
  const auto& bottom = state.objects[task.bottom];
  const bool held = state.held_object == task.top;
  const bool resting = is_resting(state, task.top, dyn);
  p.lifted = top.pos.y - top.half_size >= dyn.lift_threshold && (held || resting);
  p.stacked = !held && resting && std::abs(top.pos.x - bottom.pos.x) <= dyn.stack_tol_scale * top.half_size &&
              std::abs(top.pos.y - (bottom.pos.y + bottom.half_size + top.half_size)) <= dyn.contact_tol &&
              is_resting(state, task.bottom, dyn);
  return p;
}

void StageTracker::observe(const SimState& state) {
  const auto p = success_predicates(state, task_, dyn_);
  ever_lifted_ = ever_lifted_ || p.lifted;
  stacked_ = p.stacked;
}

}  // namespace mirlab::sim
