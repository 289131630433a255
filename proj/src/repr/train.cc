#include "mirlab/repr/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"
#include "mirlab/numerics/ops.h"
#include "mirlab/numerics/optimizer.h"
#include "mirlab/repr/losses.h"
#include "mirlab/sim/render.h"

namespace mirlab::repr {

namespace ops = numerics;
using dataset::Dataset;
using dataset::Split;

std::string_view loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kTcn: return "tcn";
    case LossKind::kTscn: return "tscn";
    case LossKind::kGcp: return "gcp";
    case LossKind::kCdgcp: return "cdgcp";
    case LossKind::kMir: return "mir";
    case LossKind::kTdc: return "tdc";
    case LossKind::kCmc: return "cmc";
  }
  return "unknown";
}

LossKind parse_loss(std::string_view name) {
  for (auto k : {LossKind::kTcn, LossKind::kTscn, LossKind::kGcp, LossKind::kCdgcp, LossKind::kMir, LossKind::kTdc,
                 LossKind::kCmc}) {
    if (loss_name(k) == name) return k;
  }
  throw ContractError("unknown loss '" + std::string(name) + "' (expected tcn|tscn|gcp|cdgcp|mir|tdc|cmc)");
}

void validate(const TrainConfig& c) {
  if (c.steps < 0) throw ContractError("train: steps must be non-negative");
  if (c.batch_size < 1) throw ContractError("train: batch_size must be positive");
  if (c.window < 2) throw ContractError("train: window must be at least 2");
  if (c.gcp_horizon < 1) throw ContractError("train: gcp_horizon must be positive");
  if (c.gcp_horizon >= c.window) throw ContractError("train: gcp_horizon must be smaller than the window");
  if (!(c.lambda_cdgcp >= 0.0)) throw ContractError("train: lambda_cdgcp must be non-negative");
  if (!(c.learning_rate > 0.0)) throw ContractError("train: learning_rate must be positive");
  if (c.log_every < 1) throw ContractError("train: log_every must be positive");
}

std::vector<NamedParameter> TrainedModel::parameters() const {
  std::vector<NamedParameter> out;
  encoder.collect(out);
  if (goal_encoder) goal_encoder->collect(out);
  if (policy) policy->collect(out);
  if (classifier) classifier->collect(out);
  return out;
}

TrainedModel init_model(LossKind kind, const EncoderArch& arch, std::uint64_t seed) {
  TrainedModel m;
  m.kind = kind;
  m.arch = arch;
  m.seed = seed;
  m.encoder = Encoder("encoder", arch, mix_seed(seed, 1));
  const int e = arch.embed_dim();
  if (kind == LossKind::kGcp) m.goal_encoder = Encoder("goal_encoder", arch, mix_seed(seed, 2));
  if (kind == LossKind::kGcp || kind == LossKind::kCdgcp || kind == LossKind::kMir) {
    m.policy = Mlp("policy", {2 * e, 64, 64, dataset::kActionDim}, mix_seed(seed, 3));
  }
  if (kind == LossKind::kTdc) m.classifier = Mlp("classifier", {2 * e, 64, kTdcClasses}, mix_seed(seed, 4));
  if (kind == LossKind::kCmc) m.classifier = Mlp("classifier", {2 * e, 64, kCmcClasses}, mix_seed(seed, 4));
  return m;
}

namespace {

struct LossParts {
  Tensor total;
  std::optional<double> tscn;
  std::optional<double> cdgcp;
};

Tensor encode_frames(const Encoder& enc, const Dataset& data, const std::vector<std::pair<std::size_t, int>>& frames,
                     const std::vector<int>& sides) {
  std::vector<double> px(frames.size() * sim::kObservationBytes);
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const auto& traj = data.trajectories[frames[r].first];
    const auto src = sides[r] == 0 ? traj.frame_a(frames[r].second) : traj.frame_b(frames[r].second);
    dataset::dequantize(src, std::span<double>(px).subspan(r * sim::kObservationBytes, sim::kObservationBytes));
  }
  return encode_pixels(enc, px);
}

std::vector<std::size_t> range_rows(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> rows(count);
  for (std::size_t i = 0; i < count; ++i) rows[i] = begin + i;
  return rows;
}

Tensor action_rows(const Dataset& data, std::size_t traj, const std::vector<int>& frames) {
  std::vector<double> a;
  for (int f : frames) {
    for (float v : data.trajectories[traj].action(f)) a.push_back(v);
  }
  return Tensor::from_data({frames.size(), static_cast<std::size_t>(dataset::kActionDim)}, std::move(a));
}

// GCP trains on single-domain windows from domain-randomized or
// arm-randomized renders only.
int gcp_side(const dataset::PairedTrajectory& traj, Rng& rng) {
  if (traj.domain_kind_b == sim::DomainKind::kArmRandomized && rng.uniform() < 0.5) return 1;
  return 0;
}

LossParts window_loss(const TrainedModel& m, const Dataset& data, const dataset::Batch& batch,
                      const TrainConfig& cfg, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(batch.config.window);
  const std::size_t B = batch.draws.size();
  const auto A = static_cast<std::size_t>(batch.anchors_per_window());
  const bool gcp = m.kind == LossKind::kGcp;
  Rng side_rng(mix_seed(seed, 0x5de));

  std::vector<std::pair<std::size_t, int>> frames;
  std::vector<int> sides_a, sides_b;
  for (const auto& d : batch.draws) {
    const int side = gcp ? gcp_side(data.trajectories[d.trajectory], side_rng) : 0;
    for (std::size_t i = 0; i < n; ++i) {
      frames.emplace_back(d.trajectory, d.start + static_cast<int>(i));
      sides_a.push_back(side);
      sides_b.push_back(1);
    }
  }
  // Window rows of side a (or the GCP observation side) and of side b (or
  // the GCP goal encoder applied to the same frames).
  const Tensor xa = encode_frames(m.encoder, data, frames, sides_a);
  const Tensor xb = gcp ? encode_frames(*m.goal_encoder, data, frames, sides_a)
                        : encode_frames(m.encoder, data, frames, sides_b);

  Tensor total = Tensor::scalar(0.0);
  double tscn_sum = 0.0, cdgcp_sum = 0.0;
  const bool contrastive = m.kind == LossKind::kTcn || m.kind == LossKind::kTscn || m.kind == LossKind::kMir;
  const bool goal_conditioned = m.kind == LossKind::kCdgcp || m.kind == LossKind::kMir || gcp;
  for (std::size_t b = 0; b < B; ++b) {
    const auto rows = range_rows(b * n, n);
    const Tensor x = ops::gather_rows(xa, rows);
    const Tensor x_bar = ops::gather_rows(xb, rows);
    Tensor window_total = Tensor::scalar(0.0);
    if (contrastive) {
      std::optional<Tensor> extra;
      if (B > 1) {
        std::vector<std::size_t> others;
        for (std::size_t r = 0; r < B * n; ++r) {
          if (r / n != b) others.push_back(r);
        }
        extra = ops::gather_rows(xb, others);
      }
      const Tensor l = m.kind == LossKind::kTcn ? loss_tcn(x, x_bar, extra) : loss_tscn(x, x_bar, extra);
      tscn_sum += l.item();
      window_total = l;
    }
    if (goal_conditioned && A > 0) {
      const auto& draw = batch.draws[b];
      std::vector<std::size_t> anchor_rows, goal_rows;
      std::vector<int> action_frames;
      for (std::size_t i = 0; i < A; ++i) {
        anchor_rows.push_back(i);
        goal_rows.push_back(i + static_cast<std::size_t>(draw.goal_offsets[i]));
        action_frames.push_back(draw.start + static_cast<int>(i));
      }
      const Tensor actions = action_rows(data, draw.trajectory, action_frames);
      Tensor l;
      if (gcp) {
        l = loss_gcp(*m.policy, ops::gather_rows(x, anchor_rows), ops::gather_rows(x_bar, goal_rows), actions,
                     draw.goal_offsets, cfg.gcp_horizon);
      } else {
        // Goals come from the other domain, in both directions.
        const Tensor forward = loss_cdgcp(*m.policy, ops::gather_rows(x, anchor_rows),
                                          ops::gather_rows(x_bar, goal_rows), actions);
        const Tensor backward = loss_cdgcp(*m.policy, ops::gather_rows(x_bar, anchor_rows),
                                           ops::gather_rows(x, goal_rows), actions);
        l = ops::add(forward, backward);
      }
      cdgcp_sum += l.item();
      window_total = m.kind == LossKind::kMir ? ops::add(window_total, ops::scale(l, cfg.lambda_cdgcp))
                                              : ops::add(window_total, l);
    }
    total = ops::add(total, window_total);
  }
  LossParts parts{ops::scale(total, 1.0 / static_cast<double>(B)), std::nullopt, std::nullopt};
  if (contrastive) parts.tscn = tscn_sum / static_cast<double>(B);
  if (goal_conditioned) parts.cdgcp = cdgcp_sum / static_cast<double>(B);
  return parts;
}

LossParts pair_loss(const TrainedModel& m, const Dataset& data, Split split, const TrainConfig& cfg,
                    std::uint64_t seed) {
  const auto pool = data.indices(split);
  if (pool.empty()) throw ContractError("train: split '" + std::string(dataset::split_name(split)) + "' is empty");
  const bool cmc = m.kind == LossKind::kCmc;
  const int classes = cmc ? kCmcClasses : kTdcClasses;
  const auto pairs = static_cast<std::size_t>(cfg.batch_size) * static_cast<std::size_t>(cfg.window);
  Rng rng(seed);
  std::vector<std::pair<std::size_t, int>> first, second;
  std::vector<int> side_first, side_second, distances;
  std::vector<sim::DomainKind> kinds_a, kinds_b;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1);
    const auto traj_index = pool[static_cast<std::size_t>(pick)];
    const auto& traj = data.trajectories[traj_index];
    const int T = traj.length;
    // Class first, then a distance inside its bin; empty bins are skipped.
    int lo = 0, hi = -1;
    while (lo > hi) {
      const int cls = static_cast<int>(rng.uniform_int(0, classes - 1));
      std::tie(lo, hi) = cmc ? cmc_bin(cls, T) : tdc_bin(cls, T);
      hi = std::min(hi, T - 1);
    }
    const int d = static_cast<int>(rng.uniform_int(lo, hi));
    const int t0 = static_cast<int>(rng.uniform_int(0, T - 1 - d));
    const bool later_first = rng.uniform() < 0.5;
    const int tf = later_first ? t0 + d : t0;
    const int ts = later_first ? t0 : t0 + d;
    int sf = 0, ss = 1;
    if (!cmc) {
      sf = static_cast<int>(rng.uniform_int(0, 1));
      ss = sf;
    }
    first.emplace_back(traj_index, tf);
    second.emplace_back(traj_index, ts);
    side_first.push_back(sf);
    side_second.push_back(ss);
    distances.push_back(d);
    kinds_a.push_back(sf == 0 ? traj.domain_kind_a : traj.domain_kind_b);
    kinds_b.push_back(ss == 0 ? traj.domain_kind_a : traj.domain_kind_b);
  }
  const Tensor ea = encode_frames(m.encoder, data, first, side_first);
  const Tensor eb = encode_frames(m.encoder, data, second, side_second);
  const int T = data.trajectories[pool.front()].length;
  const Tensor l = cmc ? loss_cmc(*m.classifier, ea, eb, distances, T, kinds_a, kinds_b)
                       : loss_tdc(*m.classifier, ea, eb, distances, T);
  return LossParts{ops::scale(l, 1.0 / static_cast<double>(pairs)), std::nullopt, std::nullopt};
}

LossParts compute_loss(const TrainedModel& m, const Dataset& data, Split split, const TrainConfig& cfg,
                       std::uint64_t seed) {
  if (m.kind == LossKind::kTdc || m.kind == LossKind::kCmc) return pair_loss(m, data, split, cfg, seed);
  const dataset::BatchConfig bc{cfg.batch_size, cfg.window, cfg.gcp_horizon};
  const auto batch = dataset::sample_batch(data, split, bc, seed);
  return window_loss(m, data, batch, cfg, mix_seed(seed, 0xb47c));
}

std::uint64_t step_seed(const TrainConfig& cfg, int step) {
  return mix_seed(mix_seed(cfg.seed, 0x7a1), static_cast<std::uint64_t>(step));
}

std::uint64_t holdout_seed(const TrainConfig& cfg) { return mix_seed(cfg.seed, 0x401d); }

}  // namespace

LossBreakdown evaluate_loss(const TrainedModel& model, const Dataset& data, Split split, const TrainConfig& config,
                            std::uint64_t seed) {
  const auto parts = compute_loss(model, data, split, config, seed);
  return LossBreakdown{parts.total.item(), parts.tscn, parts.cdgcp};
}

double holdout_tscn(const Encoder& encoder, const Dataset& data, Split split, const dataset::BatchConfig& batch,
                    int batches, std::uint64_t seed) {
  TrainedModel probe;
  probe.kind = LossKind::kTscn;
  probe.encoder = encoder;
  TrainConfig cfg;
  cfg.loss = LossKind::kTscn;
  cfg.batch_size = batch.batch_size;
  cfg.window = batch.window;
  cfg.gcp_horizon = batch.gcp_horizon;
  double sum = 0.0;
  for (int k = 0; k < batches; ++k) {
    sum += evaluate_loss(probe, data, split, cfg, mix_seed(seed, static_cast<std::uint64_t>(k))).total;
  }
  return sum / static_cast<double>(batches);
}

Tensor objective(const TrainedModel& model, const Dataset& data, Split split, const TrainConfig& config,
                 std::uint64_t seed) {
  return compute_loss(model, data, split, config, seed).total;
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  validate(config);
  if (data.trajectories.empty()) throw ContractError("train: dataset is empty");
  const bool has_holdout = !data.indices(Split::kHoldout).empty();
  TrainResult result;
  result.model = init_model(config.loss, config.arch, config.seed);
  auto params = result.model.parameters();
  auto state = numerics::make_adam_state(params, numerics::AdamConfig{config.learning_rate});

  // Parameters of the most recent step whose loss was finite.
  std::vector<std::vector<double>> last_good;
  int last_good_steps = 0;
  const auto restore = [&] {
    for (std::size_t k = 0; k < params.size() && !last_good.empty(); ++k) {
      std::ranges::copy(last_good[k], params[k].tensor.mutable_data().begin());
    }
    result.model.steps_completed = last_good_steps;
  };

  for (int step = 0; step <= config.steps; ++step) {
    const bool final_step = step == config.steps;
    const bool log = step % config.log_every == 0 || final_step;
    MetricsRow row;
    row.step = step;
    bool finite = true;
    {
      numerics::Tape tape;
      if (!final_step) {
        for (auto& p : params) tape.watch(p.tensor);
      }
      const auto parts = compute_loss(result.model, data, Split::kTrain, config, step_seed(config, step));
      row.loss = parts.total.item();
      row.loss_tscn = parts.tscn;
      row.loss_cdgcp = parts.cdgcp;
      finite = std::isfinite(row.loss);
      if (finite && !final_step) tape.backward(parts.total);
    }
    if (!finite) {
      result.aborted = true;
      result.abort_reason = "non-finite loss at step " + std::to_string(step);
    } else if (!final_step) {
      last_good.resize(params.size());
      for (std::size_t k = 0; k < params.size(); ++k) {
        const auto d = params[k].tensor.data();
        last_good[k].assign(d.begin(), d.end());
      }
      last_good_steps = step;
      try {
        numerics::adam_step(params, state);
        result.model.steps_completed = step + 1;
      } catch (const NumericError& e) {
        result.aborted = true;
        result.abort_reason = std::string(e.what()) + " at step " + std::to_string(step);
      }
    }
    for (auto& p : params) p.tensor.clear_grad();
    if (result.aborted) restore();
    if (log || result.aborted) {
      if (has_holdout) {
        row.holdout_loss = evaluate_loss(result.model, data, Split::kHoldout, config, holdout_seed(config)).total;
      }
      result.metrics.push_back(row);
    }
    if (result.aborted) break;
  }
  return result;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }
}  // namespace

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "step,loss,loss_tscn,loss_cdgcp,holdout_loss\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + fmt(r.loss) + "," + fmt(r.loss_tscn) + "," + fmt(r.loss_cdgcp) + "," +
           fmt(r.holdout_loss) + "\n";
  }
  return out;
}

}  // namespace mirlab::repr
