#include "mirlab/repr/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "mirlab/common/errors.h"

namespace mirlab::repr {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'M', 'I', 'R', 'M'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* what) {
  if (bytes.size() - pos < 4) throw FormatError(std::string("truncated ") + what, pos);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const TrainedModel& model) {
  const auto params = model.parameters();
  json record{{"loss", loss_name(model.kind)},
              {"seed", model.seed},
              {"steps_completed", model.steps_completed},
              {"channels", model.arch.channels},
              {"feature_dim", model.arch.feature_dim},
              {"mlp", model.arch.mlp}};
  json list = json::array();
  for (const auto& p : params) list.push_back(json{{"name", p.name}, {"shape", p.tensor.shape()}});
  record["parameters"] = list;
  const auto text = record.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : params) {
    for (double v : p.tensor.data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  return out;
}

TrainedModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic, expected 'MIRM'", 0);
  }
  std::size_t pos = 4;
  const auto version = get_u32(bytes, pos, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  const auto len = get_u32(bytes, pos, "record length");
  if (bytes.size() - pos < len) throw FormatError("truncated architecture record", pos);
  json record;
  try {
    record = json::parse(bytes.begin() + static_cast<long>(pos), bytes.begin() + static_cast<long>(pos + len));
  } catch (const json::exception&) {
    throw FormatError("architecture record is not valid JSON", pos);
  }
  const auto record_offset = pos;
  pos += len;

  TrainedModel model;
  std::vector<std::pair<std::string, numerics::Shape>> declared;
  try {
    EncoderArch arch;
    arch.channels = record.at("channels").get<std::vector<int>>();
    arch.feature_dim = record.at("feature_dim").get<int>();
    arch.mlp = record.at("mlp").get<std::vector<int>>();
    model = init_model(parse_loss(record.at("loss").get<std::string>()), arch, record.at("seed").get<std::uint64_t>());
    model.steps_completed = record.at("steps_completed").get<int>();
    for (const auto& p : record.at("parameters")) {
      declared.emplace_back(p.at("name").get<std::string>(), p.at("shape").get<numerics::Shape>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("architecture record: ") + e.what(), record_offset);
  } catch (const ContractError& e) {
    throw FormatError(std::string("architecture record: ") + e.what(), record_offset);
  }

  auto params = model.parameters();
  if (declared.size() != params.size()) {
    throw FormatError("architecture record lists " + std::to_string(declared.size()) + " parameters, model has " +
                          std::to_string(params.size()),
                      record_offset);
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (declared[k].first != params[k].name || declared[k].second != params[k].tensor.shape()) {
      throw FormatError("parameter '" + declared[k].first + "' does not match the architecture", record_offset);
    }
    auto dst = params[k].tensor.mutable_data();
    if ((bytes.size() - pos) / 8 < dst.size()) {
      throw FormatError("truncated parameter blob '" + params[k].name + "'", pos);
    }
    for (auto& v : dst) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
      v = std::bit_cast<double>(bits);
      pos += 8;
    }
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes after parameters", pos);
  return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace mirlab::repr
