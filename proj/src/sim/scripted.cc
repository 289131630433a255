#include "mirlab/sim/scripted.h"

#include <algorithm>
#include <cmath>

#include "mirlab/common/rng.h"

namespace mirlab::sim {

namespace {

Vec2 move_toward(Vec2 from, Vec2 target, double speed, double dt) {
  Vec2 v{(target.x - from.x) / dt, (target.y - from.y) / dt};
  const double norm = std::hypot(v.x, v.y);
  if (norm > speed) {
    v.x *= speed / norm;
    v.y *= speed / norm;
  }
  return v;
}

bool something_on_top_of(const SimState& s, int k) {
  const auto& o = s.objects[k];
  for (int j = 0; j < static_cast<int>(s.objects.size()); ++j) {
    if (j == k || s.held_object == j) continue;
    const auto& other = s.objects[j];
    if (other.pos.y > o.pos.y && std::abs(other.pos.x - o.pos.x) < o.half_size + other.half_size) return true;
  }
  return false;
}

}  // namespace

ScriptParams sample_script_params(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5c41));
  ScriptParams p;
  p.speed = rng.uniform(0.32, 0.42);
  p.carry_height = rng.uniform(0.38, 0.48);
  return p;
}

Action scripted_policy(const SimState& state, const TaskSpec& task, const ScriptParams& params, const Dynamics& dyn) {
  Action a;
  const Vec2 g = state.gripper;
  const auto& top = state.objects[task.top];
  const auto& bottom = state.objects[task.bottom];
  const double tol = params.align_tol;

  if (state.held_object == task.top) {
    a.grip_command = 1.0;
    const double stack_y = bottom.pos.y + bottom.half_size + top.half_size;
    if (std::abs(g.x - bottom.pos.x) > tol) {
      const Vec2 target = g.y < params.carry_height - tol ? Vec2{g.x, params.carry_height}
                                                          : Vec2{bottom.pos.x, params.carry_height};
      a.velocity = move_toward(g, target, params.speed, dyn.dt);
    } else if (g.y > stack_y + tol) {
      a.velocity = move_toward(g, {bottom.pos.x, stack_y}, params.speed, dyn.dt);
    } else {
      a.grip_command = -1.0;
    }
    return clamp_action(a);
  }
  if (state.held_object) {
    a.grip_command = -1.0;
    return a;
  }
  if (success_predicates(state, task, dyn).stacked) {
    a.grip_command = state.grip_closed ? -1.0 : 0.0;
    a.velocity = move_toward(g, {g.x, std::min(params.carry_height + 0.25, 0.95)}, params.speed, dyn.dt);
    return clamp_action(a);
  }
  if (state.grip_closed) {
    a.grip_command = -1.0;
    return a;
  }
  if (something_on_top_of(state, task.top)) return a;  // unresolvable: hold position

  if (std::abs(g.x - top.pos.x) > tol) {
    a.velocity = move_toward(g, {top.pos.x, params.carry_height}, params.speed, dyn.dt);
  } else if (std::abs(g.y - top.pos.y) > tol) {
    a.velocity = move_toward(g, top.pos, params.speed, dyn.dt);
  } else {
    a.grip_command = 1.0;
  }
  return clamp_action(a);
}

}  // namespace mirlab::sim
