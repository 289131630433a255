#include "mirlab/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mirlab/common/errors.h"
#include "mirlab/eval/goals.h"
#include "mirlab/sim/render.h"

namespace mirlab::eval {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("spearman: lists differ in length");
  if (a.size() < 2) throw ContractError("spearman: need at least two items");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> embed_frames(const repr::FrozenEncoder& encoder, std::span<const std::uint8_t> frames) {
  if (frames.size() % sim::kObservationBytes != 0) throw ShapeError("embed_frames: partial frame in pixel buffer");
  const std::size_t T = frames.size() / sim::kObservationBytes;
  const auto d = static_cast<std::size_t>(encoder.embed_dim());
  std::vector<double> out(T * d);
  for (std::size_t t = 0; t < T; ++t) {
    encoder.embed(frames.subspan(t * sim::kObservationBytes, sim::kObservationBytes),
                  std::span<double>(out).subspan(t * d, d));
  }
  return out;
}

ReachabilityCurve reachability_eval(const repr::FrozenEncoder& encoder, std::span<const std::uint8_t> anchor_frames,
                                    std::span<const std::uint8_t> target_frames) {
  if (anchor_frames.size() != target_frames.size()) {
    throw ContractError("reachability_eval: anchor and target sequences differ in length");
  }
  const std::size_t T = target_frames.size() / sim::kObservationBytes;
  if (T < 10) throw ContractError("reachability_eval: demo must have at least 10 frames");
  const auto d = static_cast<std::size_t>(encoder.embed_dim());
  const auto anchor = encoder.embed(anchor_frames.first(sim::kObservationBytes));
  const auto target = embed_frames(encoder, target_frames);

  ReachabilityCurve c;
  std::vector<double> ramp(T);
  for (std::size_t t = 0; t < T; ++t) {
    c.distance.push_back(std::sqrt(squared_distance(anchor, std::span<const double>(target).subspan(t * d, d))));
    ramp[t] = static_cast<double>(t);
  }
  const auto [lo, hi] = std::minmax_element(c.distance.begin(), c.distance.end());
  if (*hi > *lo) {
    for (double v : c.distance) c.normalized.push_back((v - *lo) / (*hi - *lo));
  }
  c.rho = spearman(c.distance, ramp);
  if (!c.rho) c.error = "constant embedding distance; rank correlation undefined";
  return c;
}

double alignment_accuracy(std::span<const double> emb_a, std::span<const double> emb_b, int dim, int k) {
  if (k < 0) throw ContractError("alignment_accuracy: k must be non-negative");
  if (dim < 1 || emb_a.size() != emb_b.size() || emb_a.size() % static_cast<std::size_t>(dim) != 0) {
    throw ShapeError("alignment_accuracy: embeddings must both be T x dim");
  }
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t T = emb_a.size() / d;
  if (T == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < T; ++u) {
      const double dist = squared_distance(emb_a.subspan(t * d, d), emb_b.subspan(u * d, d));
      if (dist < best_d) {
        best_d = dist;
        best = u;
      }
    }
    if (std::abs(static_cast<long>(best) - static_cast<long>(t)) <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(T);
}

double alignment_accuracy(const repr::FrozenEncoder& encoder, const dataset::PairedTrajectory& traj, int k) {
  return alignment_accuracy(embed_frames(encoder, traj.obs_a), embed_frames(encoder, traj.obs_b),
                            encoder.embed_dim(), k);
}

std::string_view condition_name(ReachCondition c) { return c == ReachCondition::kSame ? "same" : "cross"; }

ReachabilityCurve demo_reachability(const repr::FrozenEncoder& encoder, const Demo& demo, ReachCondition condition) {
  return reachability_eval(encoder, demo.canonical_frames,
                           condition == ReachCondition::kSame ? demo.canonical_frames : demo.frames);
}

}  // namespace mirlab::eval
