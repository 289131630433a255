#pragma once

#include <optional>
#include <span>

#include "mirlab/numerics/tensor.h"
#include "mirlab/repr/encoder.h"
#include "mirlab/sim/domain.h"

namespace mirlab::repr {

// P[i, k] = exp(-|i - k|) / sum_u exp(-|i - u|) over a window of n frames.
Tensor smoothing_distribution(int n);

// Soft-target contrastive loss over the window: logits X * [Xbar; extra]^T,
// target rows from `targets` (n x n) padded with zero mass on the extra
// columns. Summed over rows. `extra` may be empty ([0 x d]) or absent.
Tensor contrastive_loss(const Tensor& x, const Tensor& x_bar, const std::optional<Tensor>& extra,
                        const Tensor& targets);

// n-pairs objective: one-hot targets on the aligned frame.
Tensor loss_tcn(const Tensor& x, const Tensor& x_bar, const std::optional<Tensor>& extra = std::nullopt);
// Temporally smooth targets from smoothing_distribution.
Tensor loss_tscn(const Tensor& x, const Tensor& x_bar, const std::optional<Tensor>& extra = std::nullopt);

// Goal-conditioned action regression: squared error (summed) between
// policy(concat(obs_emb, goal_emb)) and the recorded actions. Row counts of
// all three inputs must agree.
Tensor loss_goal_conditioned(const Mlp& policy, const Tensor& obs_emb, const Tensor& goal_emb,
                             const Tensor& actions);
// Same-domain goals with a separate goal encoder. Offsets must lie in
// [1, horizon].
Tensor loss_gcp(const Mlp& policy, const Tensor& obs_emb, const Tensor& goal_emb, const Tensor& actions,
                std::span<const int> offsets, int horizon);
// Cross-domain goals embedded by the shared encoder.
Tensor loss_cdgcp(const Mlp& policy, const Tensor& obs_emb, const Tensor& other_domain_goal_emb,
                  const Tensor& actions);

inline constexpr int kTdcClasses = 5;
inline constexpr int kCmcClasses = 6;

// Temporal distance bins {1}, {2}, {3-4}, {5-20}, {21 .. T-1}; d = 0 is a
// contract error, as is d > T - 1.
int tdc_class(int d, int episode_length);
// {0} followed by the TDC bins.
int cmc_class(int d, int episode_length);
// Inclusive distance range of a class.
std::pair<int, int> tdc_bin(int cls, int episode_length);
std::pair<int, int> cmc_bin(int cls, int episode_length);

// Softmax cross-entropy of head(concat(a, b)) against one-hot classes,
// summed over pairs.
Tensor loss_distance_classification(const Mlp& head, const Tensor& emb_a, const Tensor& emb_b,
                                    std::span<const int> classes, int num_classes);

// Temporal distance classification between two frames of one sequence.
Tensor loss_tdc(const Mlp& head, const Tensor& emb_a, const Tensor& emb_b, std::span<const int> distances,
                int episode_length);
// Cross-modal variant: row r pairs a frame of domain kinds_a[r] with one of
// kinds_b[r]; same-domain rows are a contract error.
Tensor loss_cmc(const Mlp& head, const Tensor& emb_a, const Tensor& emb_b, std::span<const int> distances,
                int episode_length, std::span<const sim::DomainKind> kinds_a,
                std::span<const sim::DomainKind> kinds_b);

}  // namespace mirlab::repr
