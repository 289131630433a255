#include "mirlab/repr/losses.h"

#include <cmath>
#include <string>

#include "mirlab/common/errors.h"
#include "mirlab/numerics/ops.h"

namespace mirlab::repr {

namespace ops = numerics;

Tensor smoothing_distribution(int n) {
  if (n < 1) throw ContractError("smoothing_distribution: n must be at least 1");
  const auto N = static_cast<std::size_t>(n);
  std::vector<double> p(N * N);
  for (std::size_t i = 0; i < N; ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double d = std::abs(static_cast<double>(i) - static_cast<double>(k));
      p[i * N + k] = std::exp(-d);
      z += p[i * N + k];
    }
    for (std::size_t k = 0; k < N; ++k) p[i * N + k] /= z;
  }
  return Tensor::from_data({N, N}, std::move(p));
}

namespace {

void require_aligned(const Tensor& x, const Tensor& x_bar, const char* op) {
  if (x.rank() != 2 || x_bar.rank() != 2) throw ShapeError(std::string(op) + ": embeddings must be 2-D");
  if (x.dim(0) != x_bar.dim(0)) {
    throw ContractError(std::string(op) + ": row counts differ (" + std::to_string(x.dim(0)) + " vs " +
                        std::to_string(x_bar.dim(0)) + ")");
  }
  if (x.dim(1) != x_bar.dim(1)) throw ShapeError(std::string(op) + ": embedding widths differ");
}

Tensor identity(std::size_t n) {
  auto t = Tensor::zeros({n, n});
  auto d = t.mutable_data();
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return t;
}

Tensor one_hot(std::span<const int> classes, int num_classes) {
  const auto c = static_cast<std::size_t>(num_classes);
  auto t = Tensor::zeros({classes.size(), c});
  auto d = t.mutable_data();
  for (std::size_t r = 0; r < classes.size(); ++r) {
    if (classes[r] < 0 || classes[r] >= num_classes) throw ContractError("one_hot: class out of range");
    d[r * c + static_cast<std::size_t>(classes[r])] = 1.0;
  }
  return t;
}

}  // namespace

Tensor contrastive_loss(const Tensor& x, const Tensor& x_bar, const std::optional<Tensor>& extra,
                        const Tensor& targets) {
  require_aligned(x, x_bar, "contrastive_loss");
  const std::size_t n = x.dim(0);
  if (targets.shape() != numerics::Shape{n, n}) {
    throw ShapeError("contrastive_loss: targets must be " + numerics::shape_string({n, n}));
  }
  Tensor columns = x_bar;
  std::size_t e = 0;
  if (extra && extra->size() > 0) {
    if (extra->rank() != 2 || extra->dim(1) != x.dim(1)) {
      throw ShapeError("contrastive_loss: extra negatives must be [E x " + std::to_string(x.dim(1)) + "]");
    }
    e = extra->dim(0);
    columns = ops::concat({x_bar, *extra}, 0);
  }
  const Tensor logits = ops::matmul(x, ops::transpose(columns));
  Tensor padded = targets;
  if (e > 0) {
    std::vector<double> t(n * (n + e), 0.0);
    const auto td = targets.data();
    for (std::size_t i = 0; i < n; ++i) std::copy_n(td.data() + i * n, n, t.data() + i * (n + e));
    padded = Tensor::from_data({n, n + e}, std::move(t));
  }
  return ops::softmax_xent_soft(logits, padded);
}

Tensor loss_tcn(const Tensor& x, const Tensor& x_bar, const std::optional<Tensor>& extra) {
  require_aligned(x, x_bar, "loss_tcn");
  return contrastive_loss(x, x_bar, extra, identity(x.dim(0)));
}

Tensor loss_tscn(const Tensor& x, const Tensor& x_bar, const std::optional<Tensor>& extra) {
  require_aligned(x, x_bar, "loss_tscn");
  return contrastive_loss(x, x_bar, extra, smoothing_distribution(static_cast<int>(x.dim(0))));
}

Tensor loss_goal_conditioned(const Mlp& policy, const Tensor& obs_emb, const Tensor& goal_emb,
                             const Tensor& actions) {
  if (obs_emb.rank() != 2 || goal_emb.rank() != 2 || actions.rank() != 2) {
    throw ShapeError("goal-conditioned loss: inputs must be 2-D");
  }
  if (obs_emb.dim(0) != goal_emb.dim(0) || obs_emb.dim(0) != actions.dim(0)) {
    throw ContractError("goal-conditioned loss: observation, goal and action rows are not paired");
  }
  const Tensor pred = policy.forward(ops::concat({obs_emb, goal_emb}, 1));
  return ops::mse(pred, actions);
}

Tensor loss_gcp(const Mlp& policy, const Tensor& obs_emb, const Tensor& goal_emb, const Tensor& actions,
                std::span<const int> offsets, int horizon) {
  if (offsets.size() != obs_emb.dim(0)) throw ContractError("loss_gcp: one goal offset per row required");
  for (int j : offsets) {
    if (j < 1 || j > horizon) {
      throw ContractError("loss_gcp: goal offset " + std::to_string(j) + " outside [1, " + std::to_string(horizon) +
                          "]");
    }
  }
  return loss_goal_conditioned(policy, obs_emb, goal_emb, actions);
}

Tensor loss_cdgcp(const Mlp& policy, const Tensor& obs_emb, const Tensor& other_domain_goal_emb,
                  const Tensor& actions) {
  return loss_goal_conditioned(policy, obs_emb, other_domain_goal_emb, actions);
}

std::pair<int, int> tdc_bin(int cls, int episode_length) {
  switch (cls) {
    case 0: return {1, 1};
    case 1: return {2, 2};
    case 2: return {3, 4};
    case 3: return {5, 20};
    case 4: return {21, episode_length - 1};
  }
  throw ContractError("tdc_bin: class must be in [0, 5)");
}

std::pair<int, int> cmc_bin(int cls, int episode_length) {
  if (cls == 0) return {0, 0};
  return tdc_bin(cls - 1, episode_length);
}

int tdc_class(int d, int episode_length) {
  if (d < 1) throw ContractError("tdc_class: distance must be at least 1 (got " + std::to_string(d) + ")");
  if (d > episode_length - 1) throw ContractError("tdc_class: distance exceeds episode length");
  if (d == 1) return 0;
  if (d == 2) return 1;
  if (d <= 4) return 2;
  if (d <= 20) return 3;
  return 4;
}

int cmc_class(int d, int episode_length) {
  if (d < 0) throw ContractError("cmc_class: distance must be non-negative");
  return d == 0 ? 0 : tdc_class(d, episode_length) + 1;
}

Tensor loss_distance_classification(const Mlp& head, const Tensor& emb_a, const Tensor& emb_b,
                                    std::span<const int> classes, int num_classes) {
  require_aligned(emb_a, emb_b, "distance classification");
  if (classes.size() != emb_a.dim(0)) throw ContractError("distance classification: one class per pair required");
  if (head.out_dim() != num_classes) throw ShapeError("distance classification: head width != class count");
  const Tensor logits = head.forward(ops::concat({emb_a, emb_b}, 1));
  return ops::softmax_xent_soft(logits, one_hot(classes, num_classes));
}

Tensor loss_tdc(const Mlp& head, const Tensor& emb_a, const Tensor& emb_b, std::span<const int> distances,
                int episode_length) {
  std::vector<int> classes;
  for (int d : distances) classes.push_back(tdc_class(d, episode_length));
  return loss_distance_classification(head, emb_a, emb_b, classes, kTdcClasses);
}

Tensor loss_cmc(const Mlp& head, const Tensor& emb_a, const Tensor& emb_b, std::span<const int> distances,
                int episode_length, std::span<const sim::DomainKind> kinds_a,
                std::span<const sim::DomainKind> kinds_b) {
  if (kinds_a.size() != distances.size() || kinds_b.size() != distances.size()) {
    throw ContractError("loss_cmc: one domain pair per row required");
  }
  std::vector<int> classes;
  for (std::size_t r = 0; r < distances.size(); ++r) {
    if (kinds_a[r] == kinds_b[r]) {
      throw ContractError("loss_cmc: row " + std::to_string(r) + " pairs two frames of the same domain");
    }
    classes.push_back(cmc_class(distances[r], episode_length));
  }
  return loss_distance_classification(head, emb_a, emb_b, classes, kCmcClasses);
}

}  // namespace mirlab::repr
