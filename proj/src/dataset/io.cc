#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "mirlab/common/errors.h"
#include "mirlab/dataset/dataset.h"

namespace mirlab::dataset {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'M', 'I', 'R', 'D'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t offset() const { return pos_; }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated ") + what + ": need " + std::to_string(n) + " bytes, have " +
                            std::to_string(bytes_.size() - pos_),
                        pos_);
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

json metadata(const PairedTrajectory& t, const DatasetManifest& m) {
  const auto task = t.task();
  return json{{"task_id", t.task_id},
              {"top", task.top},
              {"bottom", task.bottom},
              {"seed", t.seed},
              {"episode_index", t.episode_index},
              {"attempt", t.attempt},
              {"domain_a", sim::domain_name(t.domain_kind_a)},
              {"domain_b", sim::domain_name(t.domain_kind_b)},
              {"domain_seed_a", t.domain_seed_a},
              {"domain_seed_b", t.domain_seed_b},
              {"split", split_name(t.split)},
              {"length", t.length},
              {"actions_shape", {t.length, kActionDim}},
              {"obs_shape", {t.length, sim::kViews, sim::kChannels, sim::kImageSize, sim::kImageSize}},
              {"dataset_seed", m.seed},
              {"episodes_per_pairing", m.episodes_per_pairing}};
}

template <typename T>
T field(const json& meta, const char* key, std::uint64_t offset) {
  if (!meta.contains(key)) throw FormatError(std::string("metadata lacks '") + key + "'", offset);
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("metadata field '") + key + "' has wrong type", offset);
  }
}

}  // namespace

std::vector<std::uint8_t> serialize(const Dataset& dataset) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kDatasetVersion);
  put_u32(out, static_cast<std::uint32_t>(dataset.trajectories.size()));
  for (const auto& t : dataset.trajectories) {
    const auto meta = metadata(t, dataset.manifest).dump();
    put_u32(out, static_cast<std::uint32_t>(meta.size()));
    out.insert(out.end(), meta.begin(), meta.end());
    for (float a : t.actions) put_u32(out, std::bit_cast<std::uint32_t>(a));
    out.insert(out.end(), t.obs_a.begin(), t.obs_a.end());
    out.insert(out.end(), t.obs_b.begin(), t.obs_b.end());
  }
  return out;
}

Dataset deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected 'MIRD'", 0);
  const auto version_offset = r.offset();
  const auto version = r.u32("version");
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version) + " (expected " +
                          std::to_string(kDatasetVersion) + ")",
                      version_offset);
  }
  const auto count = r.u32("trajectory count");
  Dataset ds;
  // Never trust the count for allocation; a corrupted value would run out of
  // bytes long before reaching it.
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto meta_offset = r.offset();
    const auto meta_len = r.u32("metadata length");
    auto meta_bytes = r.take(meta_len, "metadata record");
    json meta;
    try {
      meta = json::parse(meta_bytes.begin(), meta_bytes.end());
    } catch (const json::exception&) {
      throw FormatError("metadata record is not valid JSON", meta_offset + 4);
    }
    PairedTrajectory t;
    t.length = field<int>(meta, "length", meta_offset);
    t.task_id = field<int>(meta, "task_id", meta_offset);
    t.seed = field<std::uint64_t>(meta, "seed", meta_offset);
    t.episode_index = field<int>(meta, "episode_index", meta_offset);
    t.attempt = field<int>(meta, "attempt", meta_offset);
    t.domain_seed_a = field<std::uint64_t>(meta, "domain_seed_a", meta_offset);
    t.domain_seed_b = field<std::uint64_t>(meta, "domain_seed_b", meta_offset);
    try {
      t.domain_kind_a = sim::parse_domain(field<std::string>(meta, "domain_a", meta_offset));
      t.domain_kind_b = sim::parse_domain(field<std::string>(meta, "domain_b", meta_offset));
    } catch (const ContractError& e) {
      throw FormatError(e.what(), meta_offset);
    }
    const auto split = field<std::string>(meta, "split", meta_offset);
    if (split != "train" && split != "holdout") throw FormatError("unknown split '" + split + "'", meta_offset);
    t.split = split == "train" ? Split::kTrain : Split::kHoldout;
    if (t.length < 1 || t.task_id < 0 || t.task_id >= 6) {
      throw FormatError("metadata declares invalid length or task", meta_offset);
    }
    const auto actions_shape = field<std::vector<int>>(meta, "actions_shape", meta_offset);
    if (actions_shape != std::vector<int>{t.length, kActionDim}) {
      throw FormatError("actions_shape disagrees with length", meta_offset);
    }
    const auto obs_shape = field<std::vector<std::size_t>>(meta, "obs_shape", meta_offset);
    if (obs_shape != std::vector<std::size_t>{static_cast<std::size_t>(t.length), sim::kViews, sim::kChannels,
                                              sim::kImageSize, sim::kImageSize}) {
      throw FormatError("obs_shape disagrees with the image layout", meta_offset);
    }
    if (i == 0) {
      ds.manifest.seed = field<std::uint64_t>(meta, "dataset_seed", meta_offset);
      ds.manifest.episodes_per_pairing = field<int>(meta, "episodes_per_pairing", meta_offset);
      ds.manifest.episode_length = t.length;
    }

    const auto n = static_cast<std::size_t>(t.length);
    auto action_bytes = r.take(n * kActionDim * 4, "action array");
    t.actions.resize(n * kActionDim);
    for (std::size_t k = 0; k < t.actions.size(); ++k) {
      std::uint32_t v = 0;
      for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(action_bytes[4 * k + b]) << (8 * b);
      t.actions[k] = std::bit_cast<float>(v);
    }
    auto a = r.take(n * sim::kObservationBytes, "image array a");
    t.obs_a.assign(a.begin(), a.end());
    auto b = r.take(n * sim::kObservationBytes, "image array b");
    t.obs_b.assign(b.begin(), b.end());

    const Pairing pairing =
        t.domain_kind_b == sim::DomainKind::kInvisibleArm ? Pairing::kInvisibleArm : Pairing::kArmRandomized;
    for (int k = 0; k < t.attempt; ++k) {
      ds.manifest.discarded.push_back(
          {pairing, t.episode_index, episode_seed(ds.manifest.seed, pairing, t.episode_index, k)});
    }
    ds.trajectories.push_back(std::move(t));
  }
  if (r.offset() != bytes.size()) throw FormatError("trailing bytes after last trajectory", r.offset());
  return ds;
}

void save(const Dataset& dataset, const std::string& path) {
  const auto bytes = serialize(dataset);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

Dataset load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace mirlab::dataset
