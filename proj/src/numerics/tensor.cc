#include "mirlab/numerics/tensor.h"

#include <algorithm>
#include <sstream>

#include "mirlab/common/errors.h"

namespace mirlab::numerics {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor() : Tensor(Tensor::scalar(0.0)) {}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->data.assign(shape_size(shape), value);
  impl->shape = std::move(shape);
  return Tensor(std::move(impl));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
  if (shape_size(shape) != data.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " holds " +
                     std::to_string(shape_size(shape)) + " elements but " +
                     std::to_string(data.size()) + " were given");
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from_data({}, {value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(shape()));
  }
  return impl_->shape[axis];
}

std::span<double> Tensor::mutable_data() {
  if (impl_->tape != nullptr) {
    throw ContractError("cannot mutate a tensor that is recorded on a live tape");
  }
  return impl_->data;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() needs a single-element tensor, got " + shape_string(shape()));
  }
  return impl_->data[0];
}

std::span<const double> Tensor::grad() const {
  if (!impl_->grad) throw ContractError("tensor has no gradient");
  return *impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_->grad) std::fill(impl_->grad->begin(), impl_->grad->end(), 0.0);
}

Tensor Tensor::clone() const { return from_data(shape(), impl_->data); }

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    auto& m = members_[i];
    m->tape = nullptr;
    m->tape_id.reset();
    if (!is_leaf_[i]) m->grad.reset();
  }
  g_active_tape = previous_;
}

Tape* Tape::active() { return g_active_tape; }

std::size_t Tape::attach(const std::shared_ptr<detail::TensorImpl>& impl) {
  impl->tape = this;
  impl->tape_id = members_.size();
  members_.push_back(impl);
  is_leaf_.push_back(false);
  return *impl->tape_id;
}

void Tape::watch(const Tensor& leaf) {
  auto& impl = leaf.impl();
  if (impl.tape == this) return;
  if (impl.tape != nullptr) throw ContractError("tensor is already watched by another tape");
  const auto id = attach(leaf.impl_ptr());
  is_leaf_[id] = true;
  if (!impl.grad) impl.grad.emplace(impl.data.size(), 0.0);
}

void Tape::record(const Tensor& out, std::vector<Tensor> inputs, BackwardFn fn) {
  Node node;
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) node.inputs.push_back(in.impl_ptr());
  attach(out.impl_ptr());
  node.output = out.impl_ptr();
  node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!tracks(loss)) throw ContractError("loss is not recorded on this tape");

  for (std::size_t i = 0; i < members_.size(); ++i) {
    auto& m = members_[i];
    if (is_leaf_[i]) {
      if (!m->grad) m->grad.emplace(m->data.size(), 0.0);
    } else {
      m->grad.emplace(m->data.size(), 0.0);
    }
  }
  (*loss.impl().grad)[0] += 1.0;

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    std::vector<std::vector<double>*> sinks;
    sinks.reserve(it->inputs.size());
    for (auto& in : it->inputs) sinks.push_back(in->tape == this ? &*in->grad : nullptr);
    it->backward(*it->output->grad, GradSinks(std::move(sinks)));
  }
}

void record_if_tracked(const Tensor& out, std::vector<Tensor> inputs, BackwardFn fn) {
  Tape* tape = Tape::active();
  if (tape == nullptr) return;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [&](const Tensor& t) { return tape->tracks(t); });
  if (any) tape->record(out, std::move(inputs), std::move(fn));
}

}  // namespace mirlab::numerics
