#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "mirlab/sim/world.h"

namespace mirlab::sim {

enum class DomainKind : std::uint8_t {
  kCanonical,
  kDomainRandomized,
  kArmRandomized,
  kInvisibleArm,
  // Held-out demonstration embodiments (never used for training).
  kStick,
  kBlobHand,
};

std::string_view domain_name(DomainKind kind);
// Accepts the canonical names plus the short CLI aliases
// (dr, armrand, invisible, blobhand). Throws ContractError otherwise.
DomainKind parse_domain(std::string_view name);

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class ArmStyle : std::uint8_t {
  kLink,   // vertical link from the top edge plus a round gripper
  kStick,  // thin slanted line ending at a tool point offset from the gripper
  kBlob,   // large irregular sprite made of overlapping discs
};

struct ArmSprite {
  ArmStyle style = ArmStyle::kLink;
  double radius = 0.05;      // gripper disc radius (world units)
  double link_width = 0.03;  // link or stick thickness
  Vec2 tool_offset;          // drawn tool point relative to the gripper
  friend bool operator==(const ArmSprite&, const ArmSprite&) = default;
};

// Sub-pixel camera shift per view, in pixels.
struct ViewOffset {
  double dx = 0.0, dy = 0.0;
  friend bool operator==(const ViewOffset&, const ViewOffset&) = default;
};

struct DomainSpec {
  DomainKind kind = DomainKind::kCanonical;
  std::array<Rgb, kNumObjects> object_colors{};
  Rgb background;
  Rgb arm_color;
  double noise_amplitude = 0.0;  // uniform per-pixel noise, in [0, 1] intensity
  std::array<ViewOffset, 2> view_offsets{};
  bool arm_visible = true;
  ArmSprite arm_sprite;
  Dynamics dynamics;
  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

DomainSpec canonical_domain();

// Seeded domain sampling. Canonical ignores the seed; invisible_arm is
// canonical with the arm hidden; arm_randomized only changes the arm sprite
// and arm color (plus dynamics); domain_randomized changes every palette
// entry, noise and view offsets. Randomized kinds perturb grasp radius and
// gravity within +-10%.
DomainSpec sample_domain_spec(DomainKind kind, std::uint64_t seed);

}  // namespace mirlab::sim
