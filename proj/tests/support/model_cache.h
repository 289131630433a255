#pragma once

// Desk dataset and trained models shared by the acceptance run and the
// trained-model tests. Models are keyed by loss, seed and step count and are
// stored with the wall time their training took, so later runs only pay for
// evaluation.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mirlab/common/parallel.h"
#include "mirlab/dataset/dataset.h"
#include "mirlab/repr/checkpoint.h"
#include "mirlab/repr/train.h"

namespace mirlab::testing {

// Desk-scale protocol constants.
inline constexpr int kEpisodesPerPairing = 64;  // 128 paired trajectories
inline constexpr std::uint64_t kDataSeed = 7;
inline constexpr std::uint64_t kTrainSeed = 7;
inline constexpr int kTrainSteps = 2000;

class ModelCache {
 public:
  struct Model {
    repr::TrainedModel model;
    double train_seconds = 0.0;
    bool cached = false;
    bool aborted = false;
  };

  explicit ModelCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const dataset::Dataset& desk() {
    if (!desk_) {
      const auto path = dir_ / "desk_s7_e64.mird";
      if (std::filesystem::exists(path)) {
        desk_ = dataset::load(path.string());
      } else {
        desk_ = dataset::build_dataset(kEpisodesPerPairing, kDataSeed);
        dataset::save(*desk_, path.string());
      }
    }
    return *desk_;
  }

  // Trains every missing model (concurrently when cores allow), then loads.
  void ensure(const std::vector<repr::LossKind>& kinds) {
    std::vector<repr::LossKind> missing;
    for (auto k : kinds) {
      if (!models_.contains(k) && !std::filesystem::exists(model_path(k))) missing.push_back(k);
    }
    if (!missing.empty()) {
      const auto& data = desk();
      parallel_for(missing.size(), [&](std::size_t i) {
        repr::TrainConfig cfg;
        cfg.loss = missing[i];
        cfg.steps = kTrainSteps;
        cfg.seed = kTrainSeed;
        cfg.log_every = 100;
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = repr::train(data, cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        repr::save_model(r.model, model_path(missing[i]).string());
        std::ofstream(sidecar_path(missing[i])) << nlohmann::json{{"train_seconds", secs}, {"aborted", r.aborted}}.dump();
        std::ofstream(metrics_path(missing[i])) << repr::metrics_csv(r.metrics);
      });
    }
    for (auto k : kinds) {
      if (models_.contains(k)) continue;
      Model m;
      m.model = repr::load_model(model_path(k).string());
      m.cached = std::find(missing.begin(), missing.end(), k) == missing.end();
      std::ifstream f(sidecar_path(k));
      if (f) {
        const auto j = nlohmann::json::parse(f);
        m.train_seconds = j.at("train_seconds").get<double>();
        m.aborted = j.at("aborted").get<bool>();
      }
      models_.emplace(k, std::move(m));
    }
  }

  const Model& model(repr::LossKind k) {
    ensure({k});
    return models_.at(k);
  }

 private:
  std::string stem(repr::LossKind k) const {
    return std::string(repr::loss_name(k)) + "_s" + std::to_string(kTrainSeed) + "_n" + std::to_string(kTrainSteps);
  }
  std::filesystem::path model_path(repr::LossKind k) const { return dir_ / (stem(k) + ".mirm"); }
  std::filesystem::path sidecar_path(repr::LossKind k) const { return dir_ / (stem(k) + ".json"); }
  std::filesystem::path metrics_path(repr::LossKind k) const { return dir_ / (stem(k) + "_metrics.csv"); }

  std::filesystem::path dir_;
  std::optional<dataset::Dataset> desk_;
  std::map<repr::LossKind, Model> models_;
};

}  // namespace mirlab::testing
