#include "mirlab/dataset/dataset.h"

#include <stdexcept>

#include "mirlab/common/errors.h"
#include "mirlab/common/parallel.h"
#include "mirlab/common/rng.h"
#include "mirlab/sim/scripted.h"

namespace mirlab::dataset {

std::string_view pairing_name(Pairing p) {
  return p == Pairing::kInvisibleArm ? "dr_invisible" : "dr_arm_randomized";
}

sim::DomainKind partner_domain(Pairing p) {
  return p == Pairing::kInvisibleArm ? sim::DomainKind::kInvisibleArm : sim::DomainKind::kArmRandomized;
}

std::string_view split_name(Split s) { return s == Split::kTrain ? "train" : "holdout"; }

sim::TaskSpec PairedTrajectory::task() const { return sim::all_tasks().at(static_cast<std::size_t>(task_id)); }

std::span<const std::uint8_t> PairedTrajectory::frame_a(int t) const {
  return std::span<const std::uint8_t>(obs_a).subspan(static_cast<std::size_t>(t) * sim::kObservationBytes,
                                                      sim::kObservationBytes);
}

std::span<const std::uint8_t> PairedTrajectory::frame_b(int t) const {
  return std::span<const std::uint8_t>(obs_b).subspan(static_cast<std::size_t>(t) * sim::kObservationBytes,
                                                      sim::kObservationBytes);
}

std::span<const float> PairedTrajectory::action(int t) const {
  return std::span<const float>(actions).subspan(static_cast<std::size_t>(t) * kActionDim, kActionDim);
}

std::vector<std::size_t> Dataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].split == split) out.push_back(i);
  }
  return out;
}

std::uint64_t frame_seed(std::uint64_t episode_seed, int side, int t) {
  return mix_seed(mix_seed(episode_seed, 0xf7a3e + static_cast<std::uint64_t>(side)), static_cast<std::uint64_t>(t));
}

std::optional<PairedTrajectory> generate_paired_episode(int task_id, std::uint64_t seed, Pairing pairing,
                                                        int length) {
  if (task_id < 0 || task_id >= 6) throw ContractError("generate_paired_episode: task_id must be in [0, 6)");
  if (length < 1) throw ContractError("generate_paired_episode: length must be positive");
  PairedTrajectory traj;
  traj.length = length;
  traj.task_id = task_id;
  traj.seed = seed;
  traj.domain_kind_a = sim::DomainKind::kDomainRandomized;
  traj.domain_kind_b = partner_domain(pairing);
  traj.domain_seed_a = mix_seed(seed, 0xa);
  traj.domain_seed_b = mix_seed(seed, 0xb);
  const auto spec_a = sim::sample_domain_spec(traj.domain_kind_a, traj.domain_seed_a);
  const auto spec_b = sim::sample_domain_spec(traj.domain_kind_b, traj.domain_seed_b);
  // Physics follows side a; side b only changes appearance.
  const auto& dyn = spec_a.dynamics;

  const auto task = traj.task();
  const auto params = sim::sample_script_params(seed);
  auto state = sim::reset(task, seed);
  const auto n = static_cast<std::size_t>(length);
  traj.actions.resize(n * kActionDim);
  traj.obs_a.resize(n * sim::kObservationBytes);
  traj.obs_b.resize(n * sim::kObservationBytes);
  for (int t = 0; t < length; ++t) {
    const auto offset = static_cast<std::size_t>(t) * sim::kObservationBytes;
    for (std::size_t v = 0; v < sim::kViews; ++v) {
      const auto view_offset = offset + v * sim::kViewPixels;
      sim::render_view(state, spec_a, v, frame_seed(seed, 0, t),
                       std::span<std::uint8_t>(traj.obs_a).subspan(view_offset, sim::kViewPixels));
      sim::render_view(state, spec_b, v, frame_seed(seed, 1, t),
                       std::span<std::uint8_t>(traj.obs_b).subspan(view_offset, sim::kViewPixels));
    }
    const auto action = sim::scripted_policy(state, task, params, dyn);
    traj.actions[t * kActionDim + 0] = static_cast<float>(action.velocity.x);
    traj.actions[t * kActionDim + 1] = static_cast<float>(action.velocity.y);
    traj.actions[t * kActionDim + 2] = static_cast<float>(action.grip_command);
    state = sim::step(state, action, dyn);
  }
  if (!sim::success_predicates(state, task, dyn).stacked) return std::nullopt;
  return traj;
}

std::uint64_t episode_seed(std::uint64_t dataset_seed, Pairing pairing, int index, int attempt) {
  const auto base = mix_seed(mix_seed(dataset_seed, 1 + static_cast<std::uint64_t>(pairing)),
                             static_cast<std::uint64_t>(index));
  return attempt == 0 ? base : mix_seed(base, static_cast<std::uint64_t>(attempt));
}

namespace {
constexpr int kMaxAttempts = 50;
}

int task_for_episode(int index) { return (index + index / 4) % 6; }

Dataset build_dataset(int episodes_per_pairing, std::uint64_t seed, int length) {
  if (episodes_per_pairing < 2) throw ContractError("build_dataset: need at least 2 episodes per pairing");
  const Pairing pairings[] = {Pairing::kInvisibleArm, Pairing::kArmRandomized};
  const auto per = static_cast<std::size_t>(episodes_per_pairing);
  Dataset ds;
  ds.manifest.seed = seed;
  ds.manifest.episodes_per_pairing = episodes_per_pairing;
  ds.manifest.episode_length = length;
  ds.trajectories.resize(2 * per);
  std::vector<std::vector<DiscardRecord>> discards(2 * per);

  parallel_for(2 * per, [&](std::size_t slot) {
    const Pairing pairing = pairings[slot / per];
    const int index = static_cast<int>(slot % per);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const auto s = episode_seed(seed, pairing, index, attempt);
      auto traj = generate_paired_episode(task_for_episode(index), s, pairing, length);
      if (!traj) {
        discards[slot].push_back({pairing, index, s});
        continue;
      }
      traj->episode_index = index;
      traj->attempt = attempt;
      traj->split = index % 4 == 3 ? Split::kHoldout : Split::kTrain;
      ds.trajectories[slot] = std::move(*traj);
      return;
    }
    throw std::runtime_error("build_dataset: scripted policy failed " + std::to_string(kMaxAttempts) +
                             " consecutive seeds");
  });
  for (auto& d : discards) ds.manifest.discarded.insert(ds.manifest.discarded.end(), d.begin(), d.end());
  return ds;
}

}  // namespace mirlab::dataset
