#include "mirlab/sim/domain.h"

#include <cmath>
#include <vector>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"

namespace mirlab::sim {

namespace {

double color_distance(const Rgb& a, const Rgb& b) {
  return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.g - b.g) * (a.g - b.g) + (a.b - b.b) * (a.b - b.b));
}

// Rejection-samples a color at least `min_sep` away from every color in
// `avoid`; falls back to the last draw after 200 tries.
Rgb sample_color(Rng& rng, const std::vector<Rgb>& avoid, double min_sep) {
  Rgb c;
  for (int tries = 0; tries < 200; ++tries) {
    c = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    bool ok = true;
    for (const auto& other : avoid) ok = ok && color_distance(c, other) >= min_sep;
    if (ok) break;
  }
  return c;
}

void perturb_dynamics(Dynamics& dyn, Rng& rng) {
  dyn.grasp_radius_scale *= rng.uniform(0.9, 1.1);
  dyn.gravity *= rng.uniform(0.9, 1.1);
}

}  // namespace

std::string_view domain_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::kCanonical: return "canonical";
    case DomainKind::kDomainRandomized: return "domain_randomized";
    case DomainKind::kArmRandomized: return "arm_randomized";
    case DomainKind::kInvisibleArm: return "invisible_arm";
    case DomainKind::kStick: return "stick";
    case DomainKind::kBlobHand: return "blob_hand";
  }
  return "unknown";
}

DomainKind parse_domain(std::string_view name) {
  if (name == "canonical") return DomainKind::kCanonical;
  if (name == "domain_randomized" || name == "dr") return DomainKind::kDomainRandomized;
  if (name == "arm_randomized" || name == "armrand") return DomainKind::kArmRandomized;
  if (name == "invisible_arm" || name == "invisible") return DomainKind::kInvisibleArm;
  if (name == "stick") return DomainKind::kStick;
  if (name == "blob_hand" || name == "blobhand") return DomainKind::kBlobHand;
  throw ContractError("unknown domain '" + std::string(name) + "'");
}

DomainSpec canonical_domain() {
  DomainSpec d;
  d.kind = DomainKind::kCanonical;
  d.object_colors = {Rgb{0.85, 0.15, 0.15}, Rgb{0.15, 0.70, 0.20}, Rgb{0.15, 0.25, 0.85}};
  d.background = {0.85, 0.85, 0.80};
  d.arm_color = {0.30, 0.30, 0.30};
  d.arm_visible = true;
  d.arm_sprite = ArmSprite{};
  return d;
}

DomainSpec sample_domain_spec(DomainKind kind, std::uint64_t seed) {
  DomainSpec d = canonical_domain();
  d.kind = kind;
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(kind) + 101));
  switch (kind) {
    case DomainKind::kCanonical:
      break;
    case DomainKind::kInvisibleArm:
      d.arm_visible = false;
      break;
    case DomainKind::kArmRandomized: {
      d.arm_color = sample_color(rng, {d.background, d.object_colors[0], d.object_colors[1], d.object_colors[2]}, 0.3);
      d.arm_sprite.radius *= rng.uniform(0.7, 1.4);
      d.arm_sprite.link_width *= rng.uniform(0.7, 1.4);
      perturb_dynamics(d.dynamics, rng);
      break;
    }
    case DomainKind::kDomainRandomized: {
      d.background = sample_color(rng, {}, 0.0);
      std::vector<Rgb> used{d.background};
      for (auto& c : d.object_colors) {
        c = sample_color(rng, used, 0.35);
        used.push_back(c);
      }
      d.arm_color = sample_color(rng, used, 0.3);
      d.arm_sprite.radius *= rng.uniform(0.7, 1.4);
      d.arm_sprite.link_width *= rng.uniform(0.7, 1.4);
      d.noise_amplitude = rng.uniform(0.0, 0.04);
      for (auto& v : d.view_offsets) v = {rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25)};
      perturb_dynamics(d.dynamics, rng);
      break;
    }
    case DomainKind::kStick: {
      d.arm_color = {0.50, 0.32, 0.12};
      d.arm_sprite.style = ArmStyle::kStick;
      d.arm_sprite.radius = 0.025;
      d.arm_sprite.link_width = 0.035;
      d.arm_sprite.tool_offset = {rng.uniform(-0.03, 0.03), -0.04};
      break;
    }
    case DomainKind::kBlobHand: {
      d.arm_color = {0.92, 0.72, 0.58};
      d.arm_sprite.style = ArmStyle::kBlob;
      d.arm_sprite.radius = rng.uniform(0.08, 0.10);
      d.arm_sprite.link_width = 0.07;
      d.dynamics.grasp_radius_scale = 1.5;
      break;
    }
  }
  return d;
}

}  // namespace mirlab::sim
