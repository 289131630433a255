#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirlab/sim/domain.h"
#include "mirlab/sim/world.h"

namespace mirlab::sim {

inline constexpr std::size_t kImageSize = 32;
inline constexpr std::size_t kViews = 2;
inline constexpr std::size_t kChannels = 3;
inline constexpr std::size_t kViewPixels = kChannels * kImageSize * kImageSize;
inline constexpr std::size_t kObservationBytes = kViews * kViewPixels;

// Two-view RGB observation stored as views x channels x rows x cols, 8-bit.
// View 0 shows the whole workspace; view 1 zooms on the lower half.
struct Observation {
  std::vector<std::uint8_t> pixels = std::vector<std::uint8_t>(kObservationBytes, 0);

  std::uint8_t at(std::size_t view, std::size_t channel, std::size_t row, std::size_t col) const {
    return pixels[((view * kChannels + channel) * kImageSize + row) * kImageSize + col];
  }
  friend bool operator==(const Observation&, const Observation&) = default;
};

// Maps a pixel center of `view` to world coordinates under the domain's
// camera offset.
Vec2 pixel_to_world(const DomainSpec& domain, std::size_t view, double row, double col);

// Deterministic rasterisation of one view into `out` (kViewPixels bytes).
// Noise is drawn from frame_seed, so identical arguments give identical bytes.
void render_view(const SimState& state, const DomainSpec& domain, std::size_t view, std::uint64_t frame_seed,
                 std::span<std::uint8_t> out);

Observation render(const SimState& state, const DomainSpec& domain, std::uint64_t frame_seed);

// Writes both views side by side as an 8-bit RGB PNG (64 x 32).
void write_png(const std::string& path, const Observation& obs);

}  // namespace mirlab::sim
