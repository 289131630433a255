#include "mirlab/sim/render.h"

#include <algorithm>
#include <cmath>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"

namespace mirlab::sim {

namespace {

bool inside_object(const Object& o, Vec2 p) {
  const double dx = p.x - o.pos.x, dy = p.y - o.pos.y, h = o.half_size;
  switch (o.shape) {
    case ShapeTag::kSquare:
      return std::abs(dx) <= h && std::abs(dy) <= h;
    case ShapeTag::kCircle:
      return dx * dx + dy * dy <= h * h;
    case ShapeTag::kTriangle: {
      if (std::abs(dy) > h) return false;
      // Base of width 2h at the bottom, apex at the top.
      const double half_width = h * (h - dy) / (2.0 * h);
      return std::abs(dx) <= half_width;
    }
  }
  return false;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

bool inside_arm(const ArmSprite& arm, Vec2 g, Vec2 p) {
  switch (arm.style) {
    case ArmStyle::kLink:
      if (std::hypot(p.x - g.x, p.y - g.y) <= arm.radius) return true;
      return p.y >= g.y && std::abs(p.x - g.x) <= 0.5 * arm.link_width;
    case ArmStyle::kStick: {
      const Vec2 tip{g.x + arm.tool_offset.x, g.y + arm.tool_offset.y};
      if (std::hypot(p.x - tip.x, p.y - tip.y) <= arm.radius) return true;
      return segment_distance(p, tip, Vec2{tip.x + 0.3, 1.05}) <= 0.5 * arm.link_width;
    }
    case ArmStyle::kBlob: {
      const double r = arm.radius;
      if (std::hypot(p.x - g.x, p.y - g.y) <= r) return true;
      if (std::hypot(p.x - (g.x + 0.05), p.y - (g.y + 0.03)) <= 0.7 * r) return true;
      if (std::hypot(p.x - (g.x - 0.04), p.y - (g.y + 0.05)) <= 0.6 * r) return true;
      return segment_distance(p, g, Vec2{g.x - 0.1, 1.05}) <= 0.5 * arm.link_width;
    }
  }
  return false;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Vec2 pixel_to_world(const DomainSpec& domain, std::size_t view, double row, double col) {
  const auto& off = domain.view_offsets[view];
  const double n = static_cast<double>(kImageSize);
  const double u = (col + 0.5 - off.dx) / n;
  const double v = 1.0 - (row + 0.5 - off.dy) / n;
  return view == 0 ? Vec2{u, v} : Vec2{u, 0.5 * v};
}

void render_view(const SimState& state, const DomainSpec& domain, std::size_t view, std::uint64_t frame_seed,
                 std::span<std::uint8_t> out) {
  if (view >= kViews) throw ContractError("render: view must be 0 or 1");
  if (out.size() != kViewPixels) throw ShapeError("render: output buffer has wrong size");
  const std::size_t plane = kImageSize * kImageSize;
  const bool noisy = domain.noise_amplitude > 0.0;
  Rng rng(mix_seed(frame_seed, view));
  for (std::size_t row = 0; row < kImageSize; ++row) {
    for (std::size_t col = 0; col < kImageSize; ++col) {
      const Vec2 p = pixel_to_world(domain, view, static_cast<double>(row), static_cast<double>(col));
      Rgb c = domain.background;
      // Draw order: background, arm, objects. Objects are never occluded.
      if (domain.arm_visible && inside_arm(domain.arm_sprite, state.gripper, p)) c = domain.arm_color;
      for (const auto& o : state.objects) {
        if (inside_object(o, p)) c = domain.object_colors[o.color_id];
      }
      double rgb[3] = {c.r, c.g, c.b};
      for (std::size_t ch = 0; ch < kChannels; ++ch) {
        double v = rgb[ch];
        if (noisy) v += domain.noise_amplitude * (2.0 * rng.uniform() - 1.0);
        out[ch * plane + row * kImageSize + col] = quantize(v);
      }
    }
  }
}

Observation render(const SimState& state, const DomainSpec& domain, std::uint64_t frame_seed) {
  Observation obs;
  for (std::size_t v = 0; v < kViews; ++v) {
    render_view(state, domain, v, frame_seed, std::span<std::uint8_t>(obs.pixels).subspan(v * kViewPixels, kViewPixels));
  }
  return obs;
}

}  // namespace mirlab::sim
