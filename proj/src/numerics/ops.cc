#include "mirlab/numerics/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "mirlab/common/errors.h"

namespace mirlab::numerics {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

ConstMatMap as_matrix(std::span<const double> data, std::size_t rows, std::size_t cols) {
  return ConstMatMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MatMap as_matrix(std::vector<double>& data, std::size_t rows, std::size_t cols) {
  return MatMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MatMap mutable_matrix(std::span<double> data, std::size_t rows, std::size_t cols) {
  return MatMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions disagree for " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tensor out = Tensor::zeros({m, n});
  as_matrix(out.impl().data, m, n).noalias() = as_matrix(a.data(), m, k) * as_matrix(b.data(), k, n);
  record_if_tracked(out, {a, b}, [a, b, m, k, n](std::span<const double> g, const GradSinks& sink) {
    const auto gm = as_matrix(g, m, n);
    if (auto* ga = sink(0)) as_matrix(*ga, m, k).noalias() += gm * as_matrix(b.data(), k, n).transpose();
    if (auto* gb = sink(1)) as_matrix(*gb, k, n).noalias() += as_matrix(a.data(), m, k).transpose() * gm;
  });
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out = Tensor::zeros({n, m});
  as_matrix(out.impl().data, n, m) = as_matrix(a.data(), m, n).transpose();
  record_if_tracked(out, {a}, [m, n](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) as_matrix(*ga, m, n) += as_matrix(g, n, m).transpose();
  });
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  auto& o = out.impl().data;
  const auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] + bd[i];
  record_if_tracked(out, {a, b}, [](std::span<const double> g, const GradSinks& sink) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* gi = sink(k)) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
      }
    }
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape());
  auto& o = out.impl().data;
  const auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] - bd[i];
  record_if_tracked(out, {a, b}, [](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
    if (auto* gb = sink(1)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  auto& o = out.impl().data;
  const auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] * bd[i];
  record_if_tracked(out, {a, b}, [a, b](std::span<const double> g, const GradSinks& sink) {
    const auto ad = a.data(), bd = b.data();
    if (auto* ga = sink(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bd[i];
    }
    if (auto* gb = sink(1)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * ad[i];
    }
  });
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out = Tensor::zeros(a.shape());
  auto& o = out.impl().data;
  const auto ad = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = s * ad[i];
  record_if_tracked(out, {a}, [s](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += s * g[i];
    }
  });
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  auto& o = out.impl().data;
  const auto ad = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = ad[i] > 0.0 ? ad[i] : 0.0;
  record_if_tracked(out, {a}, [a](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) {
      const auto ad = a.data();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (ad[i] > 0.0) (*ga)[i] += g[i];
      }
    }
  });
  return out;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank(bias, 1, "add_bias");
  if (x.rank() == 0 || x.shape().back() != bias.dim(0)) {
    throw ShapeError("add_bias: last dimension of " + shape_string(x.shape()) +
                     " does not match bias " + shape_string(bias.shape()));
  }
  const std::size_t f = bias.dim(0);
  const std::size_t rows = x.size() / f;
  Tensor out = Tensor::zeros(x.shape());
  auto& o = out.impl().data;
  const auto xd = x.data(), bd = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < f; ++j) o[r * f + j] = xd[r * f + j] + bd[j];
  }
  record_if_tracked(out, {x, bias}, [rows, f](std::span<const double> g, const GradSinks& sink) {
    if (auto* gx = sink(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
    }
    if (auto* gb = sink(1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < f; ++j) (*gb)[j] += g[r * f + j];
      }
    }
  });
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  return add_bias(matmul(x, w), bias);
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " +
                     shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw ShapeError("concat: incompatible shapes " + shape_string(first) + " and " +
                       shape_string(s) + " along axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];

  std::vector<std::size_t> widths;  // contiguous block per outer index
  for (const auto& p : parts) widths.push_back(p.shape()[axis] * inner);
  const std::size_t row = out_shape[axis] * inner;

  Tensor out = Tensor::zeros(out_shape);
  auto& o = out.impl().data;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto pd = parts[k].data();
    for (std::size_t r = 0; r < outer; ++r) {
      std::copy_n(pd.begin() + r * widths[k], widths[k], o.begin() + r * row + offset);
    }
    offset += widths[k];
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  record_if_tracked(out, inputs, [widths, outer, row](std::span<const double> g, const GradSinks& sink) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (auto* gk = sink(k)) {
        for (std::size_t r = 0; r < outer; ++r) {
          for (std::size_t i = 0; i < widths[k]; ++i) (*gk)[r * widths[k] + i] += g[r * row + offset + i];
        }
      }
      offset += widths[k];
    }
  });
  return out;
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " + shape_string(shape));
  }
  Tensor out = Tensor::from_data(std::move(shape), std::vector<double>(a.data().begin(), a.data().end()));
  record_if_tracked(out, {a}, [](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
  });
  return out;
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_rank(a, 2, "gather_rows");
  const std::size_t n = a.dim(0), f = a.dim(1);
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  for (auto r : idx) {
    if (r >= n) {
      throw ShapeError("gather_rows: row " + std::to_string(r) + " out of range for " +
                       shape_string(a.shape()));
    }
  }
  Tensor out = Tensor::zeros({idx.size(), f});
  auto& o = out.impl().data;
  const auto ad = a.data();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(ad.begin() + idx[i] * f, f, o.begin() + i * f);
  }
  record_if_tracked(out, {a}, [idx, f](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < f; ++j) (*ga)[idx[i] * f + j] += g[i * f + j];
      }
    }
  });
  return out;
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s);
  record_if_tracked(out, {a}, [](std::span<const double> g, const GradSinks& sink) {
    if (auto* ga = sink(0)) {
      for (auto& v : *ga) v += g[0];
    }
  });
  return out;
}

namespace {

struct ConvGeometry {
  std::size_t batch, channels, height, width, out_channels, out_height, out_width;
  int stride;
  std::size_t patch() const { return channels * 9; }
  std::size_t out_pixels() const { return out_height * out_width; }
  std::size_t columns() const { return batch * out_pixels(); }
};

// Valid output range [lo, hi) along one axis for kernel tap `k`: the outputs
// whose input coordinate o * stride + k - 1 lies inside [0, size).
std::pair<std::size_t, std::size_t> tap_range(std::size_t size, std::size_t out_size, int stride, int k) {
  std::size_t lo = 0;
  while (lo < out_size && static_cast<long>(lo) * stride + k - 1 < 0) ++lo;
  std::size_t hi = out_size;
  while (hi > lo && static_cast<long>(hi - 1) * stride + k - 1 >= static_cast<long>(size)) --hi;
  return {lo, hi};
}

// cols[k][n * P + p] with k = c * 9 + ky * 3 + kx.
void im2col(std::span<const double> in, const ConvGeometry& geo, std::vector<double>& cols) {
  const std::size_t P = geo.out_pixels(), NP = geo.columns();
  const std::size_t W = geo.width, OW = geo.out_width;
  const auto s = static_cast<std::size_t>(geo.stride);
  cols.assign(geo.patch() * NP, 0.0);
  for (int ky = 0; ky < 3; ++ky) {
    const auto [y_lo, y_hi] = tap_range(geo.height, geo.out_height, geo.stride, ky);
    for (int kx = 0; kx < 3; ++kx) {
      const auto [x_lo, x_hi] = tap_range(W, OW, geo.stride, kx);
      for (std::size_t c = 0; c < geo.channels; ++c) {
        double* row = cols.data() + (c * 9 + ky * 3 + kx) * NP;
        for (std::size_t n = 0; n < geo.batch; ++n) {
          const double* plane = in.data() + (n * geo.channels + c) * geo.height * W;
          double* dst = row + n * P;
          for (std::size_t oy = y_lo; oy < y_hi; ++oy) {
            const double* src = plane + (oy * s + ky - 1) * W + kx - 1;
            double* d = dst + oy * OW;
            for (std::size_t ox = x_lo; ox < x_hi; ++ox) d[ox] = src[ox * s];
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& cols, const ConvGeometry& geo, std::vector<double>& grad_in) {
  const std::size_t P = geo.out_pixels(), NP = geo.columns();
  const std::size_t W = geo.width, OW = geo.out_width;
  const auto s = static_cast<std::size_t>(geo.stride);
  for (int ky = 0; ky < 3; ++ky) {
    const auto [y_lo, y_hi] = tap_range(geo.height, geo.out_height, geo.stride, ky);
    for (int kx = 0; kx < 3; ++kx) {
      const auto [x_lo, x_hi] = tap_range(W, OW, geo.stride, kx);
      for (std::size_t c = 0; c < geo.channels; ++c) {
        const double* row = cols.data() + (c * 9 + ky * 3 + kx) * NP;
        for (std::size_t n = 0; n < geo.batch; ++n) {
          double* plane = grad_in.data() + (n * geo.channels + c) * geo.height * W;
          const double* src = row + n * P;
          for (std::size_t oy = y_lo; oy < y_hi; ++oy) {
            double* d = plane + (oy * s + ky - 1) * W + kx - 1;
            const double* g = src + oy * OW;
            for (std::size_t ox = x_lo; ox < x_hi; ++ox) d[ox * s] += g[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride) {
  if (stride != 1 && stride != 2) throw ContractError("conv2d: stride must be 1 or 2");
  const bool batched = input.rank() == 4;
  if (!batched && input.rank() != 3) {
    throw ShapeError("conv2d: input must be CxHxW or NxCxHxW, got " + shape_string(input.shape()));
  }
  require_rank(kernel, 4, "conv2d");
  require_rank(bias, 1, "conv2d");
  ConvGeometry geo{};
  geo.batch = batched ? input.dim(0) : 1;
  geo.channels = input.dim(batched ? 1 : 0);
  geo.height = input.dim(batched ? 2 : 1);
  geo.width = input.dim(batched ? 3 : 2);
  geo.out_channels = kernel.dim(0);
  geo.stride = stride;
  if (kernel.dim(1) != geo.channels || kernel.dim(2) != 3 || kernel.dim(3) != 3) {
    throw ShapeError("conv2d: kernel " + shape_string(kernel.shape()) + " does not match input " +
                     shape_string(input.shape()));
  }
  if (bias.dim(0) != geo.out_channels) {
    throw ShapeError("conv2d: bias " + shape_string(bias.shape()) + " does not match kernel " +
                     shape_string(kernel.shape()));
  }
  if (geo.height == 0 || geo.width == 0) throw ShapeError("conv2d: empty spatial extent");
  geo.out_height = (geo.height - 1) / stride + 1;
  geo.out_width = (geo.width - 1) / stride + 1;

  // One image at a time: cache-friendly, and each image's output does not
  // depend on what else is in the batch.
  ConvGeometry one = geo;
  one.batch = 1;
  const std::size_t O = geo.out_channels, K = geo.patch(), P = geo.out_pixels();
  const std::size_t in_size = geo.channels * geo.height * geo.width;
  Shape out_shape = batched ? Shape{geo.batch, O, geo.out_height, geo.out_width}
                            : Shape{O, geo.out_height, geo.out_width};
  Tensor out = Tensor::zeros(std::move(out_shape));
  auto& o = out.impl().data;
  const auto bd = bias.data();
  std::vector<double> cols;
  for (std::size_t n = 0; n < geo.batch; ++n) {
    im2col(input.data().subspan(n * in_size, in_size), one, cols);
    double* dst = o.data() + n * O * P;
    mutable_matrix(std::span<double>(dst, O * P), O, P).noalias() = as_matrix(kernel.data(), O, K) * as_matrix(cols, K, P);
    for (std::size_t oc = 0; oc < O; ++oc) {
      for (std::size_t p = 0; p < P; ++p) dst[oc * P + p] += bd[oc];
    }
  }

  record_if_tracked(out, {input, kernel, bias}, [input, kernel, geo](std::span<const double> g, const GradSinks& sink) {
    ConvGeometry one = geo;
    one.batch = 1;
    const std::size_t O = geo.out_channels, K = geo.patch(), P = geo.out_pixels();
    const std::size_t in_size = geo.channels * geo.height * geo.width;
    auto* gb = sink(2);
    auto* gk = sink(1);
    auto* gi = sink(0);
    std::vector<double> cols, dcols(K * P), image_grad;
    for (std::size_t n = 0; n < geo.batch; ++n) {
      const auto gm = as_matrix(g.subspan(n * O * P, O * P), O, P);
      if (gb) {
        // Plain loop: Eigen's vectorised sum peels by address, so its
        // rounding would depend on where the buffer happens to live.
        const auto gn = g.subspan(n * O * P, O * P);
        for (std::size_t oc = 0; oc < O; ++oc) {
          double s = 0.0;
          for (std::size_t p = 0; p < P; ++p) s += gn[oc * P + p];
          (*gb)[oc] += s;
        }
      }
      if (gk) {
        im2col(input.data().subspan(n * in_size, in_size), one, cols);
        as_matrix(*gk, O, K).noalias() += gm * as_matrix(cols, K, P).transpose();
      }
      if (gi) {
        as_matrix(dcols, K, P).noalias() = as_matrix(kernel.data(), O, K).transpose() * gm;
        image_grad.assign(in_size, 0.0);
        col2im_add(dcols, one, image_grad);
        for (std::size_t i = 0; i < in_size; ++i) (*gi)[n * in_size + i] += image_grad[i];
      }
    }
  });
  return out;
}

std::vector<double> softmax_rows(const Tensor& logits) {
  require_rank(logits, 2, "softmax_rows");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  std::vector<double> p(n * c);
  const auto ld = logits.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = ld.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(row[k] - mx);
    for (std::size_t k = 0; k < c; ++k) p[i * c + k] = std::exp(row[k] - mx) / z;
  }
  return p;
}

Tensor softmax_xent_soft(const Tensor& logits, const Tensor& targets) {
  require_rank(logits, 2, "softmax_xent_soft");
  require_same_shape(logits, targets, "softmax_xent_soft");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  const auto td = targets.data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double t = td[i * c + k];
      if (!(t >= 0.0)) {
        throw ValidationError("softmax_xent_soft: target row " + std::to_string(i) + " has a negative entry");
      }
      s += t;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw ValidationError("softmax_xent_soft: target row " + std::to_string(i) + " sums to " +
                            std::to_string(s) + ", not 1");
    }
  }
  const auto ld = logits.data();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = ld.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(row[k] - mx);
    const double log_z = std::log(z) + mx;
    for (std::size_t k = 0; k < c; ++k) {
      const double t = td[i * c + k];
      if (t > 0.0) loss -= t * (row[k] - log_z);
    }
  }
  Tensor out = Tensor::scalar(loss);
  record_if_tracked(out, {logits, targets}, [logits, targets, n, c](std::span<const double> g, const GradSinks& sink) {
    if (auto* gl = sink(0)) {
      const auto p = softmax_rows(logits);
      const auto td = targets.data();
      for (std::size_t i = 0; i < n * c; ++i) (*gl)[i] += g[0] * (p[i] - td[i]);
    }
  });
  return out;
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  const auto pd = pred.data(), td = target.data();
  double s = 0.0;
  for (std::size_t i = 0; i < pd.size(); ++i) s += (pd[i] - td[i]) * (pd[i] - td[i]);
  Tensor out = Tensor::scalar(s);
  record_if_tracked(out, {pred, target}, [pred, target](std::span<const double> g, const GradSinks& sink) {
    const auto pd = pred.data(), td = target.data();
    if (auto* gp = sink(0)) {
      for (std::size_t i = 0; i < pd.size(); ++i) (*gp)[i] += 2.0 * g[0] * (pd[i] - td[i]);
    }
    if (auto* gt = sink(1)) {
      for (std::size_t i = 0; i < pd.size(); ++i) (*gt)[i] -= 2.0 * g[0] * (pd[i] - td[i]);
    }
  });
  return out;
}

}  // namespace mirlab::numerics
