#include <gtest/gtest.h>

#include <cmath>

#include "mirlab/common/errors.h"
#include "mirlab/numerics/ops.h"
#include "mirlab/numerics/optimizer.h"
#include "support/gradcheck.h"

namespace mirlab::numerics {
namespace {

using testing::gradcheck;
using testing::random_tensor;
using Inputs = std::vector<Tensor>;

TEST(Matmul, IdentityAndHandArithmetic) {
  auto a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
  auto eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  auto r = matmul(a, eye);
  EXPECT_EQ(std::vector<double>(r.data().begin(), r.data().end()), (std::vector<double>{1, 2, 3, 4}));

  auto row = Tensor::from_data({1, 2}, {1, 2});
  auto col = Tensor::from_data({2, 1}, {3, 4});
  EXPECT_DOUBLE_EQ(matmul(row, col).item(), 11.0);
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({2, 3});
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3] x [2x3]"), std::string::npos) << e.what();
  }
}

TEST(Matmul, GradientOfSumIsOnesTimesBTransposed) {
  Rng rng(3);
  auto a = random_tensor({2, 3}, rng);
  auto b = random_tensor({3, 4}, rng);
  {
    Tape tape;
    tape.watch(a);
    tape.backward(sum(matmul(a, b)));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < 4; ++j) row_sum += b.data()[k * 4 + j];
      EXPECT_NEAR(a.grad()[i * 3 + k], row_sum, 1e-12);
    }
  }
}

TEST(Conv2d, CenterKernelIsIdentity) {
  Rng rng(5);
  auto x = random_tensor({1, 5, 6}, rng);
  std::vector<double> k(9, 0.0);
  k[4] = 1.0;
  auto y = conv2d(x, Tensor::from_data({1, 1, 3, 3}, k), Tensor::zeros({1}), 1);
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv2d, OnesInputCountsWindowCells) {
  auto x = Tensor::filled({1, 2, 2}, 1.0);
  auto y = conv2d(x, Tensor::filled({1, 1, 3, 3}, 1.0), Tensor::zeros({1}), 1);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2}));
  // Every cell of a 2x2 image sees all four ones; the corner included.
  for (double v : y.data()) EXPECT_DOUBLE_EQ(v, 4.0);

  auto x3 = Tensor::filled({1, 3, 3}, 1.0);
  auto y3 = conv2d(x3, Tensor::filled({1, 1, 3, 3}, 1.0), Tensor::zeros({1}), 1);
  EXPECT_DOUBLE_EQ(y3.data()[0], 4.0);
  EXPECT_DOUBLE_EQ(y3.data()[1], 6.0);
  EXPECT_DOUBLE_EQ(y3.data()[4], 9.0);
}

TEST(Conv2d, StrideTwoShape) {
  auto y = conv2d(Tensor::zeros({1, 8, 8}), Tensor::zeros({1, 1, 3, 3}), Tensor::zeros({1}), 2);
  EXPECT_EQ(y.shape(), (Shape{1, 4, 4}));
  auto odd = conv2d(Tensor::zeros({2, 3, 7, 5}), Tensor::zeros({4, 3, 3, 3}), Tensor::zeros({4}), 2);
  EXPECT_EQ(odd.shape(), (Shape{2, 4, 4, 3}));
}

TEST(Conv2d, ChannelMismatchIsShapeError) {
  EXPECT_THROW(conv2d(Tensor::zeros({2, 4, 4}), Tensor::zeros({1, 3, 3, 3}), Tensor::zeros({1}), 1), ShapeError);
}

TEST(Conv2d, BatchedMatchesPerImage) {
  Rng rng(11);
  auto x = random_tensor({3, 2, 5, 5}, rng);
  auto k = random_tensor({4, 2, 3, 3}, rng);
  auto b = random_tensor({4}, rng);
  auto batched = conv2d(x, k, b, 2);
  for (std::size_t n = 0; n < 3; ++n) {
    std::vector<double> img(x.data().begin() + n * 50, x.data().begin() + (n + 1) * 50);
    auto single = conv2d(Tensor::from_data({2, 5, 5}, img), k, b, 2);
    for (std::size_t i = 0; i < single.size(); ++i) {
      EXPECT_NEAR(batched.data()[n * single.size() + i], single.data()[i], 1e-12);
    }
  }
}

TEST(Elementwise, ReluAddConcat) {
  auto r = relu(Tensor::from_data({3}, {-1, 0, 2}));
  EXPECT_EQ(std::vector<double>(r.data().begin(), r.data().end()), (std::vector<double>{0, 0, 2}));

  Rng rng(1);
  auto x = random_tensor({4}, rng);
  auto y = add(x, Tensor::zeros({4}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(y.data()[i], x.data()[i]);

  auto c = concat({Tensor::zeros({128}), Tensor::filled({128}, 1.0)}, 0);
  EXPECT_EQ(c.shape(), (Shape{256}));
  EXPECT_EQ(c.data()[127], 0.0);
  EXPECT_EQ(c.data()[128], 1.0);

  auto rows = concat({Tensor::zeros({2, 3}), Tensor::filled({2, 1}, 1.0)}, 1);
  EXPECT_EQ(rows.shape(), (Shape{2, 4}));
  EXPECT_EQ(rows.data()[3], 1.0);
  EXPECT_EQ(rows.data()[4], 0.0);

  EXPECT_THROW(add(Tensor::zeros({2}), Tensor::zeros({3})), ShapeError);
  EXPECT_THROW(concat({Tensor::zeros({2, 3}), Tensor::zeros({3, 3})}, 1), ShapeError);
}

TEST(SoftmaxXentSoft, UniformCase) {
  auto loss = softmax_xent_soft(Tensor::zeros({2, 2}), Tensor::filled({2, 2}, 0.5));
  EXPECT_NEAR(loss.item(), 2.0 * std::log(2.0), 1e-12);
}

TEST(SoftmaxXentSoft, OneHotIsStandardCrossEntropy) {
  Rng rng(2);
  auto logits = random_tensor({3, 3}, rng);
  auto onehot = Tensor::from_data({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto p = softmax_rows(logits);
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) expected -= std::log(p[i * 3 + i]);
  EXPECT_NEAR(softmax_xent_soft(logits, onehot).item(), expected, 1e-12);
}

TEST(SoftmaxXentSoft, GibbsBoundAndRowNormalisation) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto logits = random_tensor({4, 5}, rng);
    for (auto& v : logits.mutable_data()) v *= 10.0;
    std::vector<double> t(20);
    double entropy = 0.0;
    for (int i = 0; i < 4; ++i) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += t[i * 5 + k] = rng.uniform();
      for (int k = 0; k < 5; ++k) {
        t[i * 5 + k] /= s;
        entropy -= t[i * 5 + k] * std::log(t[i * 5 + k]);
      }
    }
    EXPECT_GE(softmax_xent_soft(logits, Tensor::from_data({4, 5}, t)).item(), entropy - 1e-12);
    const auto p = softmax_rows(logits);
    for (int i = 0; i < 4; ++i) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += p[i * 5 + k];
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(SoftmaxXentSoft, RejectsNonStochasticTargets) {
  EXPECT_THROW(softmax_xent_soft(Tensor::zeros({2, 2}), Tensor::filled({2, 2}, 0.6)), ValidationError);
  EXPECT_THROW(softmax_xent_soft(Tensor::zeros({1, 2}), Tensor::from_data({1, 2}, {1.5, -0.5})), ValidationError);
}

TEST(Mse, Values) {
  auto p = Tensor::from_data({2}, {1, 2});
  EXPECT_EQ(mse(p, p).item(), 0.0);
  EXPECT_EQ(mse(p, Tensor::zeros({2})).item(), 5.0);
  EXPECT_THROW(mse(p, Tensor::zeros({3})), ShapeError);
}

TEST(Backward, SquareAndIndependentParameter) {
  auto x = Tensor::scalar(3.0);
  auto p = Tensor::scalar(1.0);
  {
    Tape tape;
    tape.watch(x);
    tape.watch(p);
    tape.backward(mul(x, x));
  }
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  EXPECT_DOUBLE_EQ(p.grad()[0], 0.0);
}

TEST(Backward, RepeatedCallsAccumulate) {
  auto x = Tensor::scalar(3.0);
  Tape tape;
  tape.watch(x);
  auto loss = mul(x, x);
  tape.backward(loss);
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Backward, ContractErrors) {
  auto x = Tensor::from_data({2}, {1, 2});
  Tape tape;
  tape.watch(x);
  EXPECT_THROW(tape.backward(relu(x)), ContractError);
  EXPECT_THROW(tape.backward(Tensor::scalar(1.0)), ContractError);
}

TEST(Tape, UnwatchedTensorsGetNoTapeIdOrGradient) {
  auto c = Tensor::from_data({2}, {1, 2});
  auto w = Tensor::from_data({2}, {3, 4});
  {
    Tape tape;
    tape.watch(w);
    auto loss = sum(mul(c, w));
    EXPECT_FALSE(c.tape_id().has_value());
    EXPECT_TRUE(w.tape_id().has_value());
    EXPECT_TRUE(loss.tape_id().has_value());
    EXPECT_THROW(w.mutable_data(), ContractError);
    tape.backward(loss);
  }
  EXPECT_FALSE(c.has_grad());
  EXPECT_FALSE(w.tape_id().has_value());
  EXPECT_DOUBLE_EQ(w.grad()[1], 2.0);
}

TEST(Tape, OpsOutsideTapeAreNotRecorded) {
  auto a = Tensor::from_data({2}, {1, 2});
  auto b = relu(a);
  EXPECT_FALSE(b.tape_id().has_value());
}

// Finite-difference agreement for every differentiable op on random inputs.
TEST(GradientCheck, EveryOpMatchesCentralDifferences) {
  Rng rng(2024);
  const auto conv_fn = [](int stride) {
    return [stride](const Inputs& in) { return sum(mul(conv2d(in[0], in[1], in[2], stride), in[3])); };
  };
  struct Case {
    const char* name;
    std::function<Tensor(const Inputs&)> fn;
    std::vector<Shape> shapes;
  };
  const std::vector<Case> cases = {
      {"matmul", [](const Inputs& in) { return sum(mul(matmul(in[0], in[1]), in[2])); }, {{2, 5}, {5, 2}, {2, 2}}},
      {"transpose", [](const Inputs& in) { return sum(mul(transpose(in[0]), in[1])); }, {{2, 5}, {5, 2}}},
      {"add", [](const Inputs& in) { return sum(mul(add(in[0], in[1]), in[2])); }, {{10}, {10}, {10}}},
      {"sub", [](const Inputs& in) { return sum(mul(sub(in[0], in[1]), in[2])); }, {{10}, {10}, {10}}},
      {"mul", [](const Inputs& in) { return sum(mul(in[0], in[1])); }, {{10}, {10}}},
      {"scale", [](const Inputs& in) { return sum(mul(scale(in[0], -1.7), in[1])); }, {{10}, {10}}},
      {"relu", [](const Inputs& in) { return sum(mul(relu(in[0]), in[1])); }, {{10}, {10}}},
      {"add_bias", [](const Inputs& in) { return sum(mul(add_bias(in[0], in[1]), in[2])); }, {{5, 2}, {2}, {5, 2}}},
      {"concat", [](const Inputs& in) {
         return sum(mul(concat({in[0], in[1]}, 1), in[2]));
       }, {{2, 3}, {2, 2}, {2, 5}}},
      {"reshape", [](const Inputs& in) { return sum(mul(reshape(in[0], {5, 2}), in[1])); }, {{2, 5}, {5, 2}}},
      {"gather_rows", [](const Inputs& in) {
         const std::vector<std::size_t> rows{4, 0, 4};
         return sum(mul(gather_rows(in[0], rows), in[1]));
       }, {{5, 2}, {3, 2}}},
      {"conv2d_s1", conv_fn(1), {{2, 4, 4}, {2, 2, 3, 3}, {2}, {2, 4, 4}}},
      {"conv2d_s2", conv_fn(2), {{1, 2, 5, 5}, {3, 2, 3, 3}, {3}, {1, 3, 3, 3}}},
      {"softmax_xent_soft", [](const Inputs& in) {
         return softmax_xent_soft(in[0], Tensor::from_data({2, 5}, {0.1, 0.2, 0.3, 0.4, 0.0, 0.5, 0.5, 0, 0, 0}));
       }, {{2, 5}}},
      {"mse", [](const Inputs& in) { return mse(in[0], in[1]); }, {{10}, {10}}},
  };
  for (const auto& c : cases) {
    Inputs inputs;
    for (const auto& s : c.shapes) inputs.push_back(random_tensor(s, rng));
    EXPECT_LT(gradcheck(c.fn, inputs), 1e-4) << c.name;
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<NamedParameter> params{{"w", Tensor::from_data({3}, {1, 2, 3})}};
  auto state = make_adam_state(params);
  params[0].tensor.impl().grad.emplace(3, 0.0);
  adam_step(params, state);
  EXPECT_EQ(state.step_count, 1u);
  EXPECT_EQ(std::vector<double>(params[0].tensor.data().begin(), params[0].tensor.data().end()),
            (std::vector<double>{1, 2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  std::vector<NamedParameter> params{{"w", Tensor::from_data({2}, {0.5, 0.5})}};
  auto state = make_adam_state(params, AdamConfig{.learning_rate = 0.01});
  params[0].tensor.impl().grad = std::vector<double>{3.0, -0.2};
  adam_step(params, state);
  // m_hat = g and v_hat = g^2 after bias correction, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(params[0].tensor.data()[0], 0.5 - 0.01, 1e-8);
  EXPECT_NEAR(params[0].tensor.data()[1], 0.5 + 0.01, 1e-8);
}

TEST(Adam, DeterministicAcrossRuns) {
  auto run = [] {
    std::vector<NamedParameter> params{{"w", Tensor::from_data({2}, {0.1, -0.3})}};
    auto state = make_adam_state(params);
    for (int i = 0; i < 5; ++i) {
      params[0].tensor.impl().grad = std::vector<double>{0.3 * i, -0.7 + i};
      adam_step(params, state);
    }
    return std::vector<double>(params[0].tensor.data().begin(), params[0].tensor.data().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, NanGradientNamesParameter) {
  std::vector<NamedParameter> params{{"encoder.conv0.w", Tensor::from_data({1}, {1.0})}};
  auto state = make_adam_state(params);
  params[0].tensor.impl().grad = std::vector<double>{std::nan("")};
  try {
    adam_step(params, state);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.conv0.w"), std::string::npos);
  }
  EXPECT_EQ(state.step_count, 0u);
  EXPECT_EQ(params[0].tensor.data()[0], 1.0);
}

}  // namespace
}  // namespace mirlab::numerics
