#include "mirlab/eval/goals.h"

#include <cmath>
#include <string>

#include "mirlab/common/errors.h"

namespace mirlab::eval {

std::span<const double> GoalSequence::goal(int i) const {
  if (i < 0 || i >= size()) throw ContractError("GoalSequence: goal index " + std::to_string(i) + " out of range");
  const auto d = static_cast<std::size_t>(dim);
  return std::span<const double>(embeddings).subspan(static_cast<std::size_t>(i) * d, d);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("squared_distance: vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

namespace {
std::size_t frame_count(std::span<const double> emb, int dim) {
  if (dim < 1 || emb.size() % static_cast<std::size_t>(dim) != 0) {
    throw ShapeError("demo embeddings must be T x dim");
  }
  return emb.size() / static_cast<std::size_t>(dim);
}
}  // namespace

double compute_w(std::span<const double> emb, int dim) {
  const std::size_t T = frame_count(emb, dim);
  if (T < 2) throw ContractError("compute_w: need at least two frames");
  const auto d = static_cast<std::size_t>(dim);
  double s = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    s += std::sqrt(squared_distance(emb.subspan(t * d, d), emb.subspan((t + 1) * d, d)));
  }
  return s / static_cast<double>(T - 1);
}

GoalSequence sample_goals(std::span<const double> emb, int dim, int stride, double epsilon) {
  const std::size_t T = frame_count(emb, dim);
  if (stride < 1) throw ContractError("sample_goals: stride must be positive");
  if (T < static_cast<std::size_t>(stride)) throw ContractError("sample_goals: demo shorter than the stride");
  GoalSequence g;
  g.dim = dim;
  g.epsilon = epsilon;
  g.stride_in_range = stride >= 5 && stride <= 10;
  const int last = static_cast<int>(T) - 1;
  for (int f = stride - 1; f <= last; f += stride) g.source_frames.push_back(f);
  if (g.source_frames.back() != last) g.source_frames.push_back(last);
  const auto d = static_cast<std::size_t>(dim);
  for (int f : g.source_frames) {
    const auto row = emb.subspan(static_cast<std::size_t>(f) * d, d);
    g.embeddings.insert(g.embeddings.end(), row.begin(), row.end());
  }
  g.w = T >= 2 ? compute_w(emb, dim) : 0.0;
  return g;
}

int reward(std::span<const double> o, std::span<const double> g, double w, double epsilon) {
  if (!(w > 0.0)) throw ContractError("reward: w must be positive (degenerate demo normalisation)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractError("reward: epsilon must lie in (0, 1)");
  return std::exp(-w * squared_distance(o, g)) > epsilon ? 1 : 0;
}

}  // namespace mirlab::eval
