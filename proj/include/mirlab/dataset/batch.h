#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mirlab/dataset/dataset.h"

namespace mirlab::dataset {

struct BatchConfig {
  int batch_size = 2;   // B sequences per batch
  int window = 50;      // n aligned frames per sequence
  int gcp_horizon = 20; // goal offsets are drawn from [1, gcp_horizon]
};

// One sequence of the batch: frames [start, start + window) of both sides.
// Cross-domain goal-conditioned anchors are window positions
// i in [0, window - gcp_horizon), each paired with offset goal_offsets[i] so
// the goal frame i + j stays inside the window.
struct WindowDraw {
  std::size_t trajectory = 0;
  int start = 0;
  std::vector<int> goal_offsets;
  friend bool operator==(const WindowDraw&, const WindowDraw&) = default;
};

// The other B - 1 windows of a batch serve as extra negatives for each
// sequence's contrastive loss.
struct Batch {
  BatchConfig config;
  std::vector<WindowDraw> draws;
  int anchors_per_window() const;
};

// B independent (trajectory, start) draws from the given split. Throws
// ContractError when the window exceeds a trajectory, B < 1, or the split is
// empty.
Batch sample_batch(const Dataset& dataset, Split split, const BatchConfig& config, std::uint64_t seed);

// Converts stored 8-bit pixels to doubles in [0, 1].
void dequantize(std::span<const std::uint8_t> in, std::span<double> out);

// Frames [start, start + count) of one side (0 = a, 1 = b) as a flat
// count x 2 x 3 x 32 x 32 array in [0, 1].
std::vector<double> window_pixels(const PairedTrajectory& traj, int side, int start, int count);

}  // namespace mirlab::dataset
