#include "mirlab/dataset/batch.h"

#include <algorithm>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"

namespace mirlab::dataset {

int Batch::anchors_per_window() const { return std::max(0, config.window - config.gcp_horizon); }

Batch sample_batch(const Dataset& dataset, Split split, const BatchConfig& config, std::uint64_t seed) {
  if (config.batch_size < 1) throw ContractError("sample_batch: batch size must be at least 1");
  if (config.window < 1) throw ContractError("sample_batch: window must be at least 1");
  if (config.gcp_horizon < 1) throw ContractError("sample_batch: gcp_horizon must be at least 1");
  const auto pool = dataset.indices(split);
  if (pool.empty()) throw ContractError("sample_batch: split '" + std::string(split_name(split)) + "' is empty");
  Batch batch;
  batch.config = config;
  Rng rng(seed);
  const int anchors = batch.anchors_per_window();
  for (int b = 0; b < config.batch_size; ++b) {
    WindowDraw d;
    d.trajectory = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    const int length = dataset.trajectories[d.trajectory].length;
    if (config.window > length) {
      throw ContractError("sample_batch: window " + std::to_string(config.window) + " exceeds trajectory length " +
                          std::to_string(length));
    }
    d.start = static_cast<int>(rng.uniform_int(0, length - config.window));
    d.goal_offsets.resize(static_cast<std::size_t>(anchors));
    for (auto& j : d.goal_offsets) j = static_cast<int>(rng.uniform_int(1, config.gcp_horizon));
    batch.draws.push_back(std::move(d));
  }
  return batch;
}

void dequantize(std::span<const std::uint8_t> in, std::span<double> out) {
  if (in.size() != out.size()) throw ShapeError("dequantize: size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<double>(in[i]) / 255.0;
}

std::vector<double> window_pixels(const PairedTrajectory& traj, int side, int start, int count) {
  if (start < 0 || count < 0 || start + count > traj.length) {
    throw ContractError("window_pixels: frames out of range");
  }
  const auto& src = side == 0 ? traj.obs_a : traj.obs_b;
  const auto begin = static_cast<std::size_t>(start) * sim::kObservationBytes;
  const auto n = static_cast<std::size_t>(count) * sim::kObservationBytes;
  std::vector<double> out(n);
  dequantize(std::span<const std::uint8_t>(src).subspan(begin, n), out);
  return out;
}

}  // namespace mirlab::dataset
