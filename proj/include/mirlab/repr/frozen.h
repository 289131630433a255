#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mirlab/repr/encoder.h"

namespace mirlab::repr {

// Single-precision, allocation-free forward pass of a trained Encoder, used by
// the evaluation loops that encode thousands of simulated frames. Matches
// Encoder::forward to float rounding (see the tests for the tolerance).
class FrozenEncoder {
 public:
  explicit FrozenEncoder(const Encoder& encoder);

  int embed_dim() const { return embed_dim_; }
  // obs: kObservationBytes 8-bit pixels (2 x 3 x 32 x 32). Writes embed_dim
  // values to out.
  void embed(std::span<const std::uint8_t> obs, std::span<double> out) const;
  std::vector<double> embed(std::span<const std::uint8_t> obs) const;

 private:
  struct Conv {
    int in_channels, out_channels, in_size, out_size, stride;
    std::vector<float> weight;  // out x (in * 9)
    std::vector<float> bias;
  };
  struct Dense {
    int in, out;
    std::vector<float> weight;  // in x out, row-major
    std::vector<float> bias;
    bool relu;
  };
  std::vector<Conv> convs_;
  Dense view_linear_;
  std::vector<Dense> fusion_;
  int embed_dim_ = 0;
};

}  // namespace mirlab::repr
