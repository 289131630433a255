#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirlab/numerics/optimizer.h"
#include "mirlab/numerics/tensor.h"

namespace mirlab::repr {

using numerics::NamedParameter;
using numerics::Tensor;

// Fully connected stack; ReLU between layers, none after the last.
class Mlp {
 public:
  Mlp() = default;
  // widths = {in, hidden..., out}.
  Mlp(std::string name, std::vector<int> widths, std::uint64_t seed);

  Tensor forward(const Tensor& x) const;
  int in_dim() const { return widths_.front(); }
  int out_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  void collect(std::vector<NamedParameter>& out) const;
  bool empty() const { return weights_.empty(); }

 private:
  std::string name_;
  std::vector<int> widths_;
  std::vector<Tensor> weights_;  // [in x out]
  std::vector<Tensor> biases_;
};

struct EncoderArch {
  std::vector<int> channels{8, 16, 32, 64};  // one entry per conv stage
  int feature_dim = 64;                      // per-view linear output
  std::vector<int> mlp{128, 128, 64};        // fusion widths; last = embed_dim
  int embed_dim() const { return mlp.back(); }
  friend bool operator==(const EncoderArch&, const EncoderArch&) = default;
};

// Two-view convolutional encoder. Each view runs through the same conv
// stack: per stage a stride-1 conv then a stride-2 conv, each followed by
// ReLU. The flattened per-view map goes through a shared linear layer (ReLU),
// the two view features are concatenated and passed through the fusion MLP.
class Encoder {
 public:
  Encoder() = default;
  Encoder(std::string name, EncoderArch arch, std::uint64_t seed);

  // obs: [N x 2 x 3 x 32 x 32] or a single [2 x 3 x 32 x 32] observation.
  // Returns [N x embed_dim] (N = 1 for a single observation).
  Tensor forward(const Tensor& obs) const;
  // Per-view conv features before the linear layer, [2N x C x 2 x 2].
  Tensor conv_features(const Tensor& obs) const;

  const EncoderArch& arch() const { return arch_; }
  void collect(std::vector<NamedParameter>& out) const;
  std::vector<NamedParameter> parameters() const;

 private:
  std::string name_;
  EncoderArch arch_;
  std::vector<Tensor> conv_weights_;  // stage k: [2k] stride 1, [2k + 1] stride 2
  std::vector<Tensor> conv_biases_;
  Tensor view_weight_;
  Tensor view_bias_;
  Mlp fusion_;
};

// Encodes a flat [N x 2 x 3 x 32 x 32] pixel array (values in [0, 1]).
Tensor encode_pixels(const Encoder& encoder, std::span<const double> pixels);

// Sets every parameter to zero (used by tests and the zero-embedding check).
void zero_parameters(std::span<NamedParameter> params);

}  // namespace mirlab::repr
