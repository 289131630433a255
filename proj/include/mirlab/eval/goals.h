#pragma once

#include <span>
#include <vector>

namespace mirlab::eval {

inline constexpr double kDefaultEpsilon = 0.3;
inline constexpr int kDefaultStride = 8;

// Goals for one demonstration. Only goal(active_index) is visible; the index
// only moves forward and equals size() once every goal is reached.
struct GoalSequence {
  int dim = 0;
  std::vector<double> embeddings;  // size() x dim
  std::vector<int> source_frames;  // 0-based demo frame of each goal
  double w = 0.0;
  double epsilon = kDefaultEpsilon;
  int active_index = 0;
  bool stride_in_range = true;  // false when sampled outside [5, 10]

  int size() const { return static_cast<int>(source_frames.size()); }
  bool done() const { return active_index >= size(); }
  std::span<const double> goal(int i) const;
  std::span<const double> active() const { return goal(active_index); }
};

// Every `stride`-th frame counting from 1 (frames stride, 2 stride, ... in
// 1-based numbering), plus the final frame if not already included. The
// normalisation w is computed from the same embeddings. Strides outside
// [5, 10] are allowed but flagged. Throws ContractError for stride < 1 or
// fewer than stride frames.
GoalSequence sample_goals(std::span<const double> demo_embeddings, int dim, int stride,
                          double epsilon = kDefaultEpsilon);

// Mean Euclidean distance between consecutive embeddings. Throws
// ContractError for fewer than two frames.
double compute_w(std::span<const double> demo_embeddings, int dim);

double squared_distance(std::span<const double> a, std::span<const double> b);

// 1 iff exp(-w ||o - g||^2) > epsilon. Throws ContractError for w <= 0 or
// epsilon outside (0, 1).
int reward(std::span<const double> obs_embedding, std::span<const double> goal_embedding, double w, double epsilon);

}  // namespace mirlab::eval
