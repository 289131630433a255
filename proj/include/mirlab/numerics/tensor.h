#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mirlab::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tape;

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::optional<std::vector<double>> grad;
  // Set while the tensor participates in a live tape.
  Tape* tape = nullptr;
  std::optional<std::size_t> tape_id;
};

}  // namespace detail

// Dense row-major array of doubles. Copies share storage (handle semantics);
// use clone() for a deep copy. Tensors that are not attached to a tape are
// never written by any operation and can be shared across threads.
class Tensor {
 public:
  // Scalar zero.
  Tensor();

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor from_data(Shape shape, std::vector<double> data);
  static Tensor scalar(double value);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const { return impl_->data; }
  // Direct write access for parameter updates and test fixtures. Throws
  // ContractError when the tensor is recorded on a live tape.
  std::span<double> mutable_data();
  // Value of a single-element tensor.
  double item() const;

  bool has_grad() const { return impl_->grad.has_value(); }
  // Throws ContractError when no gradient has been populated.
  std::span<const double> grad() const;
  void zero_grad();
  void clear_grad() { impl_->grad.reset(); }

  std::optional<std::size_t> tape_id() const { return impl_->tape_id; }

  // Deep copy detached from any tape.
  Tensor clone() const;

  detail::TensorImpl& impl() const { return *impl_; }
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Gradient sinks handed to a backward closure: sink(k) is the gradient buffer
// of the k-th recorded input, or nullptr when that input is not on the tape.
class GradSinks {
 public:
  explicit GradSinks(std::vector<std::vector<double>*> sinks) : sinks_(std::move(sinks)) {}
  std::vector<double>* operator()(std::size_t k) const { return sinks_[k]; }

 private:
  std::vector<std::vector<double>*> sinks_;
};

using BackwardFn = std::function<void(std::span<const double> out_grad, const GradSinks& sinks)>;

// Reverse-mode gradient tape. Constructing a Tape makes it the active tape on
// the calling thread until it is destroyed; operations on tensors that are on
// the active tape are recorded. Parameters join a tape through watch().
//
//   Tape tape;
//   tape.watch(w);
//   Tensor loss = mse(matmul(x, w), y);
//   tape.backward(loss);   // w.grad() now holds d loss / d w
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();

  // Attaches a leaf tensor. Its gradient buffer persists after the tape is
  // destroyed and accumulates across backward() calls.
  void watch(const Tensor& leaf);
  bool tracks(const Tensor& t) const { return t.impl().tape == this; }

  // Fills gradients of every watched tensor. Repeated calls accumulate into
  // the watched gradients; intermediate gradients are recomputed each time.
  void backward(const Tensor& loss);

  // Used by operations: records out = f(inputs) if any input is tracked.
  void record(const Tensor& out, std::vector<Tensor> inputs, BackwardFn fn);
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::shared_ptr<detail::TensorImpl> output;
    std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
    BackwardFn backward;
  };

  std::size_t attach(const std::shared_ptr<detail::TensorImpl>& impl);

  Tape* previous_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<std::shared_ptr<detail::TensorImpl>> members_;
  std::vector<bool> is_leaf_;
};

// Records the node on the active tape when any input is tracked there.
void record_if_tracked(const Tensor& out, std::vector<Tensor> inputs, BackwardFn fn);

}  // namespace mirlab::numerics
