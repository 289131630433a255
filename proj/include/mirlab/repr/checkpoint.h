#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirlab/repr/train.h"

namespace mirlab::repr {

// "MIRM", u32 version, u32 length + JSON architecture record (loss kind,
// widths, seed, steps, parameter names and shapes in order), then every
// parameter as little-endian f64 in the declared order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace mirlab::repr
