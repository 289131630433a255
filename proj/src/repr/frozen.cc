#include "mirlab/repr/frozen.h"

#include <Eigen/Core>
#include <algorithm>

#include "mirlab/common/errors.h"
#include "mirlab/sim/render.h"

namespace mirlab::repr {

namespace {

using FMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FMap = Eigen::Map<FMatrix>;
using ConstFMap = Eigen::Map<const FMatrix>;

std::vector<float> to_float(std::span<const double> v) { return std::vector<float>(v.begin(), v.end()); }

// Same column layout as the training convolution: cols[c * 9 + ky * 3 + kx][p].
void im2col(const float* in, int channels, int size, int out_size, int stride, std::vector<float>& cols) {
  const std::size_t P = static_cast<std::size_t>(out_size) * out_size;
  cols.assign(static_cast<std::size_t>(channels) * 9 * P, 0.0f);
  for (int ky = 0; ky < 3; ++ky) {
    // Outputs whose input row oy * stride + ky - 1 is inside the image.
    const int y_lo = ky == 0 ? 1 : 0;
    const int y_hi = std::min(out_size, (size - ky) / stride + 1);
    for (int kx = 0; kx < 3; ++kx) {
      const int x_lo = kx == 0 ? 1 : 0;
      const int x_hi = std::min(out_size, (size - kx) / stride + 1);
      for (int c = 0; c < channels; ++c) {
        const float* plane = in + static_cast<std::size_t>(c) * size * size;
        float* dst = cols.data() + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * P;
        for (int oy = y_lo; oy < y_hi; ++oy) {
          const float* src = plane + (oy * stride + ky - 1) * size + kx - 1;
          float* d = dst + oy * out_size;
          if (stride == 1) {
            std::copy(src + x_lo, src + x_hi, d + x_lo);
          } else {
            for (int ox = x_lo; ox < x_hi; ++ox) d[ox] = src[2 * ox];
          }
        }
      }
    }
  }
}

}  // namespace

FrozenEncoder::FrozenEncoder(const Encoder& encoder) {
  const auto params = encoder.parameters();
  const auto& arch = encoder.arch();
  std::size_t k = 0;
  int in = static_cast<int>(sim::kChannels);
  int size = static_cast<int>(sim::kImageSize);
  for (int c : arch.channels) {
    for (int stride : {1, 2}) {
      Conv conv;
      conv.in_channels = in;
      conv.out_channels = c;
      conv.in_size = size;
      conv.stride = stride;
      conv.out_size = (size - 1) / stride + 1;
      conv.weight = to_float(params.at(k++).tensor.data());
      conv.bias = to_float(params.at(k++).tensor.data());
      convs_.push_back(std::move(conv));
      in = c;
      size = convs_.back().out_size;
    }
  }
  const auto& vw = params.at(k++).tensor;
  view_linear_ = Dense{static_cast<int>(vw.dim(0)), static_cast<int>(vw.dim(1)), to_float(vw.data()),
                       to_float(params.at(k++).tensor.data()), true};
  while (k < params.size()) {
    const auto& w = params.at(k++).tensor;
    fusion_.push_back(Dense{static_cast<int>(w.dim(0)), static_cast<int>(w.dim(1)), to_float(w.data()),
                            to_float(params.at(k++).tensor.data()), true});
  }
  if (fusion_.empty()) throw ContractError("FrozenEncoder: encoder has no fusion layers");
  fusion_.back().relu = false;
  embed_dim_ = fusion_.back().out;
}

void FrozenEncoder::embed(std::span<const std::uint8_t> obs, std::span<double> out) const {
  if (obs.size() != sim::kObservationBytes) throw ShapeError("FrozenEncoder: observation has wrong size");
  if (out.size() != static_cast<std::size_t>(embed_dim_)) throw ShapeError("FrozenEncoder: output has wrong size");
  thread_local std::vector<float> a, b, cols, features;
  features.assign(sim::kViews * static_cast<std::size_t>(view_linear_.out), 0.0f);
  for (std::size_t v = 0; v < sim::kViews; ++v) {
    const auto pixels = obs.subspan(v * sim::kViewPixels, sim::kViewPixels);
    a.resize(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) a[i] = static_cast<float>(pixels[i]) / 255.0f;
    for (const auto& conv : convs_) {
      im2col(a.data(), conv.in_channels, conv.in_size, conv.out_size, conv.stride, cols);
      const auto P = static_cast<Eigen::Index>(conv.out_size) * conv.out_size;
      const auto K = static_cast<Eigen::Index>(conv.in_channels) * 9;
      b.resize(static_cast<std::size_t>(conv.out_channels * P));
      FMap(b.data(), conv.out_channels, P).noalias() =
          ConstFMap(conv.weight.data(), conv.out_channels, K) * ConstFMap(cols.data(), K, P);
      for (int oc = 0; oc < conv.out_channels; ++oc) {
        float* row = b.data() + oc * P;
        for (Eigen::Index p = 0; p < P; ++p) row[p] = std::max(row[p] + conv.bias[oc], 0.0f);
      }
      std::swap(a, b);
    }
    const auto& L = view_linear_;
    Eigen::Map<Eigen::RowVectorXf> f(features.data() + v * L.out, L.out);
    f.noalias() = Eigen::Map<const Eigen::RowVectorXf>(a.data(), L.in) * ConstFMap(L.weight.data(), L.in, L.out);
    for (int j = 0; j < L.out; ++j) f[j] = std::max(f[j] + L.bias[j], 0.0f);
  }
  a = features;
  for (const auto& L : fusion_) {
    b.resize(static_cast<std::size_t>(L.out));
    Eigen::Map<Eigen::RowVectorXf> h(b.data(), L.out);
    h.noalias() = Eigen::Map<const Eigen::RowVectorXf>(a.data(), L.in) * ConstFMap(L.weight.data(), L.in, L.out);
    for (int j = 0; j < L.out; ++j) h[j] = L.relu ? std::max(h[j] + L.bias[j], 0.0f) : h[j] + L.bias[j];
    std::swap(a, b);
  }
  for (int j = 0; j < embed_dim_; ++j) out[j] = a[j];
}

std::vector<double> FrozenEncoder::embed(std::span<const std::uint8_t> obs) const {
  std::vector<double> out(static_cast<std::size_t>(embed_dim_));
  embed(obs, out);
  return out;
}

}  // namespace mirlab::repr
