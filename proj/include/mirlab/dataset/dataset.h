#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirlab/sim/domain.h"
#include "mirlab/sim/render.h"
#include "mirlab/sim/world.h"

namespace mirlab::dataset {

// Domain-randomized renders are always side a; side b is the partner domain.
enum class Pairing : std::uint8_t { kInvisibleArm, kArmRandomized };

std::string_view pairing_name(Pairing p);
sim::DomainKind partner_domain(Pairing p);

enum class Split : std::uint8_t { kTrain, kHoldout };

std::string_view split_name(Split s);

inline constexpr int kActionDim = 3;

struct PairedTrajectory {
  int length = 0;  // T frames; frame t is the state before actions[t]
  std::vector<float> actions;        // T x 3: vx, vy, grip
  std::vector<std::uint8_t> obs_a;   // T x kObservationBytes
  std::vector<std::uint8_t> obs_b;
  sim::DomainKind domain_kind_a = sim::DomainKind::kDomainRandomized;
  sim::DomainKind domain_kind_b = sim::DomainKind::kInvisibleArm;
  std::uint64_t domain_seed_a = 0;
  std::uint64_t domain_seed_b = 0;
  int task_id = 0;  // index into sim::all_tasks()
  std::uint64_t seed = 0;  // episode seed (reset + script parameters + render noise)
  int episode_index = 0;   // position within its pairing
  int attempt = 0;         // number of discarded seeds before this one
  Split split = Split::kTrain;

  sim::TaskSpec task() const;
  std::span<const std::uint8_t> frame_a(int t) const;
  std::span<const std::uint8_t> frame_b(int t) const;
  std::span<const float> action(int t) const;

  friend bool operator==(const PairedTrajectory&, const PairedTrajectory&) = default;
};

struct DiscardRecord {
  Pairing pairing = Pairing::kInvisibleArm;
  int episode_index = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const DiscardRecord&, const DiscardRecord&) = default;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  int episodes_per_pairing = 0;
  int episode_length = sim::kEpisodeLength;
  std::vector<DiscardRecord> discarded;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
  std::vector<PairedTrajectory> trajectories;
  DatasetManifest manifest;

  std::vector<std::size_t> indices(Split split) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Seeds of the frame renders. Both sides share the physical state; only the
// noise stream differs.
std::uint64_t frame_seed(std::uint64_t episode_seed, int side, int t);

// One scripted rollout rendered in both domains of the pairing. Returns
// nullopt when the scripted policy fails to stack within the episode length.
std::optional<PairedTrajectory> generate_paired_episode(int task_id, std::uint64_t seed, Pairing pairing,
                                                        int length = sim::kEpisodeLength);

// Episode seed of attempt `attempt` for episode `index` of a pairing.
std::uint64_t episode_seed(std::uint64_t dataset_seed, Pairing pairing, int index, int attempt);

// Task of episode `index`: round-robin over the six ordered color pairs,
// rotated by one every four episodes so the held-out episodes also cover all
// six tasks.
int task_for_episode(int index);

// n episodes per pairing with tasks from task_for_episode. Within each
// pairing every fourth episode (index % 4 == 3) is held out. Trajectory order: all invisible-arm pairs, then arm-randomized.
// Failed episodes are replaced by the next attempt seed and listed in the
// manifest.
Dataset build_dataset(int episodes_per_pairing, std::uint64_t seed, int length = sim::kEpisodeLength);

// Binary format "MIRD": magic, u32 version (1), u32 trajectory count, then
// per trajectory a u32-length-prefixed JSON metadata record followed by the
// little-endian f32 action array and the u8 image arrays of both sides.
inline constexpr std::uint32_t kDatasetVersion = 1;

void save(const Dataset& dataset, const std::string& path);
Dataset load(const std::string& path);
std::vector<std::uint8_t> serialize(const Dataset& dataset);
Dataset deserialize(std::span<const std::uint8_t> bytes);

}  // namespace mirlab::dataset
