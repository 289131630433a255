#pragma once

#include <cmath>
#include <optional>

#include "mirlab/sim/domain.h"
#include "mirlab/sim/render.h"

namespace mirlab::testing {

struct PixelCentroid {
  double row = 0.0;
  double col = 0.0;
  int count = 0;
};

// Centroid of the pixels whose color is within `tol` of the object's palette
// color and closer to it than to the background. Works on raw bytes only.
inline std::optional<PixelCentroid> object_centroid(const sim::Observation& obs, const sim::DomainSpec& domain,
                                                    int color_id, std::size_t view, double tol = 0.2) {
  const auto& target = domain.object_colors[color_id];
  const auto& bg = domain.background;
  PixelCentroid c;
  for (std::size_t r = 0; r < sim::kImageSize; ++r) {
    for (std::size_t col = 0; col < sim::kImageSize; ++col) {
      const double px[3] = {obs.at(view, 0, r, col) / 255.0, obs.at(view, 1, r, col) / 255.0,
                            obs.at(view, 2, r, col) / 255.0};
      const double dt = std::hypot(px[0] - target.r, px[1] - target.g, px[2] - target.b);
      const double db = std::hypot(px[0] - bg.r, px[1] - bg.g, px[2] - bg.b);
      if (dt <= tol && dt < db) {
        c.row += static_cast<double>(r);
        c.col += static_cast<double>(col);
        c.count += 1;
      }
    }
  }
  if (c.count == 0) return std::nullopt;
  c.row /= c.count;
  c.col /= c.count;
  return c;
}

}  // namespace mirlab::testing
