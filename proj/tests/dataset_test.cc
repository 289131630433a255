#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "mirlab/common/errors.h"
#include "mirlab/dataset/batch.h"
#include "mirlab/dataset/dataset.h"
#include "mirlab/sim/scripted.h"
#include "support/centroid.h"

namespace mirlab::dataset {
namespace {

const Dataset& small_dataset() {
  static const Dataset ds = build_dataset(8, 5);
  return ds;
}

TEST(PairedEpisode, PartnerDomainFollowsPairing) {
  const auto inv = generate_paired_episode(0, 1, Pairing::kInvisibleArm);
  ASSERT_TRUE(inv.has_value());
  EXPECT_EQ(inv->domain_kind_a, sim::DomainKind::kDomainRandomized);
  EXPECT_EQ(inv->domain_kind_b, sim::DomainKind::kInvisibleArm);
  const auto arm = generate_paired_episode(0, 1, Pairing::kArmRandomized);
  ASSERT_TRUE(arm.has_value());
  EXPECT_EQ(arm->domain_kind_b, sim::DomainKind::kArmRandomized);
  EXPECT_EQ(inv->actions, arm->actions);
}

TEST(PairedEpisode, Deterministic) {
  EXPECT_EQ(generate_paired_episode(3, 77, Pairing::kArmRandomized),
            generate_paired_episode(3, 77, Pairing::kArmRandomized));
}

TEST(PairedEpisode, ShapesAndActionBounds) {
  const auto t = generate_paired_episode(2, 9, Pairing::kInvisibleArm);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->length, sim::kEpisodeLength);
  EXPECT_EQ(t->actions.size(), static_cast<std::size_t>(t->length) * kActionDim);
  EXPECT_EQ(t->obs_a.size(), static_cast<std::size_t>(t->length) * sim::kObservationBytes);
  EXPECT_EQ(t->obs_b.size(), t->obs_a.size());
  for (float a : t->actions) {
    EXPECT_LE(a, 1.0f);
    EXPECT_GE(a, -1.0f);
  }
}

TEST(PairedEpisode, ObjectCentroidsAlignAcrossSides) {
  for (const auto pairing : {Pairing::kInvisibleArm, Pairing::kArmRandomized}) {
    const auto t = generate_paired_episode(4, 123, pairing);
    ASSERT_TRUE(t.has_value());
    const auto spec_a = sim::sample_domain_spec(t->domain_kind_a, t->domain_seed_a);
    const auto spec_b = sim::sample_domain_spec(t->domain_kind_b, t->domain_seed_b);
    for (int f = 0; f < t->length; ++f) {
      sim::Observation a, b;
      a.pixels.assign(t->frame_a(f).begin(), t->frame_a(f).end());
      b.pixels.assign(t->frame_b(f).begin(), t->frame_b(f).end());
      for (int color = 0; color < sim::kNumObjects; ++color) {
        for (std::size_t v = 0; v < sim::kViews; ++v) {
          const auto ca = testing::object_centroid(a, spec_a, color, v);
          const auto cb = testing::object_centroid(b, spec_b, color, v);
          ASSERT_EQ(ca.has_value(), cb.has_value()) << "frame " << f << " color " << color << " view " << v;
          if (!ca) continue;
          EXPECT_LE(std::abs(ca->row - cb->row), 1.0);
          EXPECT_LE(std::abs(ca->col - cb->col), 1.0);
        }
      }
    }
  }
}

TEST(PairedEpisode, RegeneratedStatesMatchStoredActions) {
  const auto t = generate_paired_episode(1, 31, Pairing::kInvisibleArm);
  ASSERT_TRUE(t.has_value());
  const auto dyn = sim::sample_domain_spec(t->domain_kind_a, t->domain_seed_a).dynamics;
  auto state = sim::reset(t->task(), t->seed);
  const auto params = sim::sample_script_params(t->seed);
  for (int f = 0; f < t->length; ++f) {
    const auto a = sim::scripted_policy(state, t->task(), params, dyn);
    EXPECT_FLOAT_EQ(t->action(f)[0], static_cast<float>(a.velocity.x));
    EXPECT_FLOAT_EQ(t->action(f)[2], static_cast<float>(a.grip_command));
    state = sim::step(state, a, dyn);
  }
}

TEST(BuildDataset, CountsSplitsAndTaskCoverage) {
  const auto& ds = small_dataset();
  EXPECT_EQ(ds.trajectories.size(), 16u);
  const auto train = ds.indices(Split::kTrain);
  const auto hold = ds.indices(Split::kHoldout);
  EXPECT_EQ(train.size() + hold.size(), ds.trajectories.size());
  EXPECT_EQ(hold.size(), 4u);
  std::set<std::size_t> all(train.begin(), train.end());
  for (auto h : hold) EXPECT_TRUE(all.insert(h).second);
  std::set<int> tops;
  for (const auto& t : ds.trajectories) tops.insert(t.task().top);
  EXPECT_EQ(tops.size(), 3u);
}

TEST(BuildDataset, SixtyFourPerPairingGivesAllTasksInBothSplits) {
  std::set<int> train_tasks, hold_tasks;
  for (int i = 0; i < 64; ++i) (i % 4 == 3 ? hold_tasks : train_tasks).insert(task_for_episode(i));
  EXPECT_EQ(train_tasks.size(), 6u);
  EXPECT_EQ(hold_tasks.size(), 6u);
}

TEST(BuildDataset, RejectsTooFewEpisodes) { EXPECT_THROW(build_dataset(1, 0), ContractError); }

TEST(BuildDataset, DeterministicAndSeedSensitive) {
  EXPECT_EQ(build_dataset(2, 5), build_dataset(2, 5));
  EXPECT_NE(build_dataset(2, 5).trajectories[0].obs_a, build_dataset(2, 6).trajectories[0].obs_a);
}

TEST(Serialization, RoundTripAndMagic) {
  const auto& ds = small_dataset();
  const auto bytes = serialize(ds);
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MIRD");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(deserialize(bytes), ds);
  EXPECT_EQ(serialize(deserialize(bytes)), bytes);

  const auto path = std::filesystem::temp_directory_path() / "mirlab_dataset_test.mird";
  save(ds, path.string());
  EXPECT_EQ(load(path.string()), ds);
  std::filesystem::remove(path);
}

TEST(Serialization, ManifestRecordsDiscardsFromAttempts) {
  Dataset ds = build_dataset(2, 1);
  ds.trajectories[1].attempt = 2;
  const auto back = deserialize(serialize(ds));
  ASSERT_EQ(back.manifest.discarded.size(), 2u);
  EXPECT_EQ(back.manifest.discarded[1].seed,
            episode_seed(1, Pairing::kInvisibleArm, ds.trajectories[1].episode_index, 1));
}

TEST(Serialization, CorruptionGivesFormatErrorWithOffset) {
  const auto bytes = serialize(build_dataset(2, 3));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize(bad_magic), FormatError);

  auto bad_version = bytes;
  bad_version[4] = 2;
  try {
    deserialize(bad_version);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }

  // Metadata length of the first trajectory blown up past the file end.
  auto bad_length = bytes;
  bad_length[12] = 0xff;
  bad_length[13] = 0xff;
  bad_length[14] = 0xff;
  try {
    deserialize(bad_length);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 16u);
  }

  auto bad_count = bytes;
  bad_count[8] = 0xff;
  EXPECT_THROW(deserialize(bad_count), FormatError);

  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<long>(bytes.size() / 2));
  EXPECT_THROW(deserialize(truncated), FormatError);
  EXPECT_THROW(deserialize(std::span<const std::uint8_t>(bytes.data(), 3)), FormatError);
}

TEST(SampleBatch, OffsetsAndDeterminism) {
  const auto& ds = small_dataset();
  const BatchConfig cfg{4, 50, 20};
  const auto a = sample_batch(ds, Split::kTrain, cfg, 11);
  const auto b = sample_batch(ds, Split::kTrain, cfg, 11);
  EXPECT_EQ(a.draws, b.draws);
  EXPECT_EQ(a.anchors_per_window(), 30);
  std::set<int> starts, offsets;
  for (std::uint64_t s = 0; s < 200; ++s) {
    for (const auto& d : sample_batch(ds, Split::kTrain, cfg, s).draws) {
      EXPECT_EQ(ds.trajectories[d.trajectory].split, Split::kTrain);
      EXPECT_GE(d.start, 0);
      EXPECT_LE(d.start, 50);
      starts.insert(d.start);
      ASSERT_EQ(d.goal_offsets.size(), 30u);
      for (int j : d.goal_offsets) {
        EXPECT_GE(j, 1);
        EXPECT_LE(j, 20);
        offsets.insert(j);
      }
    }
  }
  EXPECT_TRUE(starts.count(0) && starts.count(50));
  EXPECT_EQ(offsets.size(), 20u);
}

TEST(SampleBatch, Contracts) {
  const auto& ds = small_dataset();
  EXPECT_THROW(sample_batch(ds, Split::kTrain, BatchConfig{2, 101, 20}, 0), ContractError);
  EXPECT_THROW(sample_batch(ds, Split::kTrain, BatchConfig{0, 50, 20}, 0), ContractError);
  EXPECT_NO_THROW(sample_batch(ds, Split::kHoldout, BatchConfig{1, 100, 20}, 0));
}

TEST(WindowPixels, DequantizesToUnitRange) {
  const auto& t = small_dataset().trajectories[0];
  const auto px = window_pixels(t, 1, 10, 3);
  ASSERT_EQ(px.size(), 3 * sim::kObservationBytes);
  EXPECT_DOUBLE_EQ(px[0], t.frame_b(10)[0] / 255.0);
  EXPECT_DOUBLE_EQ(px.back(), t.frame_b(12).back() / 255.0);
  EXPECT_THROW(window_pixels(t, 0, 98, 3), ContractError);
}

}  // namespace
}  // namespace mirlab::dataset
