#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace mirlab::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

enum class ShapeTag : std::uint8_t { kSquare, kCircle, kTriangle };

inline constexpr int kNumObjects = 3;

// objects[c] always carries color_id c. The second coordinate is height; the
// floor is y = 0 and objects are axis-aligned boxes of side 2 * half_size for
// contact purposes regardless of their drawn shape.
struct Object {
  Vec2 pos;
  double half_size = 0.07;
  ShapeTag shape = ShapeTag::kSquare;
  int color_id = 0;
  friend bool operator==(const Object&, const Object&) = default;
};

struct SimState {
  Vec2 gripper;
  bool grip_closed = false;
  std::optional<int> held_object;
  std::vector<Object> objects;
  int time_step = 0;
  friend bool operator==(const SimState&, const SimState&) = default;
};

// Stack `top` onto `bottom`; the remaining color is the distractor.
struct TaskSpec {
  int top = 0;
  int bottom = 1;
  int distractor() const { return 3 - top - bottom; }
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// The six ordered (top, bottom) color pairs.
std::array<TaskSpec, 6> all_tasks();

struct Action {
  Vec2 velocity;             // workspace units per second, each in [-1, 1]
  double grip_command = 0.0;  // > 0 closes, < 0 opens, 0 keeps
};

Action clamp_action(const Action& a);

// Physical constants. Randomized domains perturb grasp_radius_scale and
// gravity by up to +-10%.
struct Dynamics {
  double dt = 0.1;
  double gravity = 1.5;              // fall speed, units per second
  double grasp_radius_scale = 1.2;   // grasp radius = scale * half_size
  double lift_threshold = 0.15;      // height above rest counted as lifted
  double stack_tol_scale = 0.6;      // |dx| tolerance = scale * half_size
  double contact_tol = 1e-6;
  friend bool operator==(const Dynamics&, const Dynamics&) = default;
};

inline constexpr int kEpisodeLength = 100;

// Places the three objects on the floor at seeded, non-overlapping positions
// and the gripper at a seeded start. Throws PlacementError when 100
// rejection samples fail.
SimState reset(const TaskSpec& task, std::uint64_t seed);

SimState step(const SimState& state, const Action& action, const Dynamics& dyn = {});

// Height at which object k's center would rest if dropped at horizontal
// position x (floor or top of the highest overlapping object at or below it).
double support_height(const SimState& state, int k, double x);
bool is_resting(const SimState& state, int k, const Dynamics& dyn = {});

struct StagePredicates {
  bool lifted = false;
  bool stacked = false;
};

// Instantaneous predicates: lifted when the top object is at least
// lift_threshold above its floor rest height and is either held or resting
// (a falling object does not count); stacked when the top object rests,
// unheld, on the bottom object within the horizontal tolerance.
StagePredicates success_predicates(const SimState& state, const TaskSpec& task, const Dynamics& dyn = {});

// Episode-level staging: lifting is latched once observed, and a final stack
// implies a lift.
class StageTracker {
 public:
  explicit StageTracker(TaskSpec task, Dynamics dyn = {}) : task_(task), dyn_(dyn) {}
  void observe(const SimState& state);
  bool lifted() const { return ever_lifted_ || stacked_; }
  bool stacked() const { return stacked_; }

 private:
  TaskSpec task_;
  Dynamics dyn_;
  bool ever_lifted_ = false;
  bool stacked_ = false;
};

}  // namespace mirlab::sim
