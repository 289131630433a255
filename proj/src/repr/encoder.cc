#include "mirlab/repr/encoder.h"

#include <cmath>

#include "mirlab/common/errors.h"
#include "mirlab/common/rng.h"
#include "mirlab/numerics/ops.h"
#include "mirlab/sim/render.h"

namespace mirlab::repr {

namespace ops = numerics;

namespace {

// Uniform fan-in scaling: bound sqrt(6 / fan_in) ahead of a ReLU and
// sqrt(3 / fan_in) for a linear output.
Tensor init_uniform(numerics::Shape shape, std::size_t fan_in, bool relu_follows, Rng& rng) {
  auto t = Tensor::zeros(std::move(shape));
  const double bound = std::sqrt((relu_follows ? 6.0 : 3.0) / static_cast<double>(fan_in));
  for (auto& v : t.mutable_data()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

Mlp::Mlp(std::string name, std::vector<int> widths, std::uint64_t seed)
    : name_(std::move(name)), widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ContractError("Mlp: need at least input and output widths");
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const auto in = static_cast<std::size_t>(widths_[l]);
    const auto out = static_cast<std::size_t>(widths_[l + 1]);
    weights_.push_back(init_uniform({in, out}, in, l + 2 < widths_.size(), rng));
    biases_.push_back(Tensor::zeros({out}));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ops::linear(h, weights_[l], biases_[l]);
    if (l + 1 < weights_.size()) h = ops::relu(h);
  }
  return h;
}

void Mlp::collect(std::vector<NamedParameter>& out) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back({name_ + "/layer" + std::to_string(l) + "/weight", weights_[l]});
    out.push_back({name_ + "/layer" + std::to_string(l) + "/bias", biases_[l]});
  }
}

Encoder::Encoder(std::string name, EncoderArch arch, std::uint64_t seed) : name_(std::move(name)), arch_(std::move(arch)) {
  if (arch_.channels.empty() || arch_.mlp.empty() || arch_.feature_dim < 1) {
    throw ContractError("Encoder: architecture needs conv stages, a feature width and fusion widths");
  }
  Rng rng(mix_seed(seed, 0xe4c));
  std::size_t in = sim::kChannels;
  std::size_t side = sim::kImageSize;
  for (int c : arch_.channels) {
    const auto out = static_cast<std::size_t>(c);
    conv_weights_.push_back(init_uniform({out, in, 3, 3}, in * 9, true, rng));
    conv_biases_.push_back(Tensor::zeros({out}));
    conv_weights_.push_back(init_uniform({out, out, 3, 3}, out * 9, true, rng));
    conv_biases_.push_back(Tensor::zeros({out}));
    in = out;
    side = (side + 1) / 2;
  }
  const std::size_t flat = in * side * side;
  const auto feat = static_cast<std::size_t>(arch_.feature_dim);
  view_weight_ = init_uniform({flat, feat}, flat, true, rng);
  view_bias_ = Tensor::zeros({feat});
  std::vector<int> widths{static_cast<int>(sim::kViews) * arch_.feature_dim};
  widths.insert(widths.end(), arch_.mlp.begin(), arch_.mlp.end());
  fusion_ = Mlp(name_ + "/fusion", widths, mix_seed(seed, 0xf05));
}

Tensor Encoder::conv_features(const Tensor& obs) const {
  const auto& s = obs.shape();
  const bool single = s.size() == 4;
  if (!(single || s.size() == 5) || s[s.size() - 4] != sim::kViews || s[s.size() - 3] != sim::kChannels ||
      s[s.size() - 2] != sim::kImageSize || s[s.size() - 1] != sim::kImageSize) {
    throw ShapeError("encode: expected [N x 2 x 3 x 32 x 32] or [2 x 3 x 32 x 32], got " +
                     numerics::shape_string(s));
  }
  const std::size_t n = single ? 1 : s[0];
  Tensor h = ops::reshape(obs, {n * sim::kViews, sim::kChannels, sim::kImageSize, sim::kImageSize});
  for (std::size_t k = 0; k < conv_weights_.size(); ++k) {
    h = ops::relu(ops::conv2d(h, conv_weights_[k], conv_biases_[k], k % 2 == 0 ? 1 : 2));
  }
  return h;
}

Tensor Encoder::forward(const Tensor& obs) const {
  Tensor h = conv_features(obs);
  const std::size_t views = h.dim(0);
  h = ops::reshape(h, {views, h.size() / views});
  h = ops::relu(ops::linear(h, view_weight_, view_bias_));
  // Rows are view-major per observation, so this places view 0 then view 1.
  h = ops::reshape(h, {views / sim::kViews, sim::kViews * static_cast<std::size_t>(arch_.feature_dim)});
  return fusion_.forward(h);
}

void Encoder::collect(std::vector<NamedParameter>& out) const {
  for (std::size_t k = 0; k < conv_weights_.size(); ++k) {
    const auto stem = name_ + "/stage" + std::to_string(k / 2) + (k % 2 == 0 ? "/conv_s1" : "/conv_s2");
    out.push_back({stem + "/weight", conv_weights_[k]});
    out.push_back({stem + "/bias", conv_biases_[k]});
  }
  out.push_back({name_ + "/view_linear/weight", view_weight_});
  out.push_back({name_ + "/view_linear/bias", view_bias_});
  fusion_.collect(out);
}

std::vector<NamedParameter> Encoder::parameters() const {
  std::vector<NamedParameter> out;
  collect(out);
  return out;
}

Tensor encode_pixels(const Encoder& encoder, std::span<const double> pixels) {
  if (pixels.size() % sim::kObservationBytes != 0) {
    throw ShapeError("encode_pixels: buffer is not a whole number of observations");
  }
  const std::size_t n = pixels.size() / sim::kObservationBytes;
  auto obs = Tensor::from_data({n, sim::kViews, sim::kChannels, sim::kImageSize, sim::kImageSize},
                               std::vector<double>(pixels.begin(), pixels.end()));
  return encoder.forward(obs);
}

void zero_parameters(std::span<NamedParameter> params) {
  for (auto& p : params) {
    for (auto& v : p.tensor.mutable_data()) v = 0.0;
  }
}

}  // namespace mirlab::repr
