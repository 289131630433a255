#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirlab/dataset/batch.h"
#include "mirlab/dataset/dataset.h"
#include "mirlab/repr/encoder.h"

namespace mirlab::repr {

enum class LossKind : std::uint8_t { kTcn, kTscn, kGcp, kCdgcp, kMir, kTdc, kCmc };

std::string_view loss_name(LossKind kind);
LossKind parse_loss(std::string_view name);  // throws ContractError

struct TrainConfig {
  LossKind loss = LossKind::kMir;
  int steps = 2000;
  int batch_size = 2;
  int window = 50;
  int gcp_horizon = 20;
  double lambda_cdgcp = 1.0;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int log_every = 50;
  EncoderArch arch;
};

// Throws ContractError naming the first invalid field.
void validate(const TrainConfig& config);

// Everything a method learns. `encoder` is the representation used for
// evaluation; the goal encoder only exists for the single-domain GCP
// baseline; `policy` for the goal-conditioned methods; `classifier` for
// TDC/CMC.
struct TrainedModel {
  LossKind kind = LossKind::kMir;
  EncoderArch arch;
  std::uint64_t seed = 0;
  int steps_completed = 0;
  Encoder encoder;
  std::optional<Encoder> goal_encoder;
  std::optional<Mlp> policy;
  std::optional<Mlp> classifier;

  std::vector<NamedParameter> parameters() const;
};

// Freshly initialised model for the loss kind (deterministic in seed).
TrainedModel init_model(LossKind kind, const EncoderArch& arch, std::uint64_t seed);

struct MetricsRow {
  int step = 0;
  double loss = 0.0;
  std::optional<double> loss_tscn;
  std::optional<double> loss_cdgcp;
  std::optional<double> holdout_loss;
};

struct TrainResult {
  TrainedModel model;
  std::vector<MetricsRow> metrics;
  bool aborted = false;      // a non-finite loss or gradient stopped training
  std::string abort_reason;  // model then holds the last parameters with a finite loss
};

// Seeded loop: sample_batch -> loss -> backward -> Adam. Logs every
// log_every steps (and at step 0 and the final step), including the loss
// on a fixed held-out batch.
TrainResult train(const dataset::Dataset& data, const TrainConfig& config);

struct LossBreakdown {
  double total = 0.0;
  std::optional<double> tscn;
  std::optional<double> cdgcp;
};

// Loss of the model's own objective on a batch drawn with `seed` from the
// split (no gradient). Normalised per sequence / pair exactly as in
// training.
LossBreakdown evaluate_loss(const TrainedModel& model, const dataset::Dataset& data, dataset::Split split,
                            const TrainConfig& config, std::uint64_t seed);

// The training objective as a scalar on the active tape (same batch and
// normalisation as evaluate_loss).
Tensor objective(const TrainedModel& model, const dataset::Dataset& data, dataset::Split split,
                 const TrainConfig& config, std::uint64_t seed);

// Mean TSCN loss per window of the model's encoder over `batches` batches
// from the split, regardless of the model's own objective.
double holdout_tscn(const Encoder& encoder, const dataset::Dataset& data, dataset::Split split,
                    const dataset::BatchConfig& batch, int batches, std::uint64_t seed);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

}  // namespace mirlab::repr
