#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirlab/dataset/dataset.h"
#include "mirlab/eval/demos.h"
#include "mirlab/repr/frozen.h"

namespace mirlab::eval {

// Ranks with ties sharing their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> values);

// Spearman's rank correlation: Pearson correlation of average ranks.
// Returns nullopt when either list is constant (the correlation is
// undefined). Throws ContractError for unequal lengths or fewer than 2 items.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

// Embeds every frame of a flat [T x kObservationBytes] pixel sequence;
// returns T x embed_dim row-major.
std::vector<double> embed_frames(const repr::FrozenEncoder& encoder, std::span<const std::uint8_t> frames);

struct ReachabilityCurve {
  std::vector<double> distance;             // raw ||phi(anchor_0) - phi(o_t)||
  std::vector<double> normalized;           // min-max scaled to [0, 1]; empty if constant
  std::optional<double> rho;                // spearman(distance, 0..T-1)
  std::string error;                        // set when rho is undefined
};

// Distances from the first anchor frame to every target frame. Passing the
// same sequence twice gives the same-domain curve; passing two renderings of
// one trajectory gives the cross-domain curve. Throws ContractError when the
// sequences differ in length or have fewer than 10 frames.
ReachabilityCurve reachability_eval(const repr::FrozenEncoder& encoder, std::span<const std::uint8_t> anchor_frames,
                                    std::span<const std::uint8_t> target_frames);

enum class ReachCondition : std::uint8_t { kSame, kCross };

std::string_view condition_name(ReachCondition c);

// Reachability curve of a demo as seen by the agent. Both conditions anchor
// at canonical frame 0; kSame measures against the canonical rendering of the
// demo, kCross against the demonstrator's own rendering.
ReachabilityCurve demo_reachability(const repr::FrozenEncoder& encoder, const Demo& demo, ReachCondition condition);

// Fraction of side-a frames whose nearest side-b frame (Euclidean embedding
// distance, first index wins ties) lies within k frames.
double alignment_accuracy(const repr::FrozenEncoder& encoder, const dataset::PairedTrajectory& traj, int k);

// Same, from precomputed T x d embeddings.
double alignment_accuracy(std::span<const double> emb_a, std::span<const double> emb_b, int dim, int k);

}  // namespace mirlab::eval
