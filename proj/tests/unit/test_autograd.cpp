#include "jsccf/autograd.hpp"
#include "jsccf/errors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <complex>

using namespace jsccf;
using namespace jsccf::nn;
using jsccf::testing::check_gradients;
using jsccf::testing::random_matrix;

namespace {

constexpr double kTol = 1e-6;

void expect_grad_ok(const std::function<Var()>& f, const std::vector<std::pair<std::string, Var>>& params) {
  const auto r = check_gradients(f, params);
  EXPECT_LT(r.max_rel_error, kTol) << r.worst;
  EXPECT_GT(r.checked, 0u);
}

}  // namespace

TEST(Autograd, MatmulValueAndGradient) {
  Var a = Var::parameter(random_matrix(3, 4, 1));
  Var b = Var::parameter(random_matrix(4, 2, 2));
  const Matrix expected = a.value() * b.value();
  EXPECT_TRUE(matmul(a, b).value().isApprox(expected, 1e-15));
  expect_grad_ok([&] { return sum_squares(matmul(a, b)); }, {{"a", a}, {"b", b}});
}

TEST(Autograd, ElementwiseOps) {
  Var a = Var::parameter(random_matrix(2, 3, 3));
  Var b = Var::parameter(random_matrix(2, 3, 4));
  expect_grad_ok([&] { return sum_squares(add(a, b)); }, {{"a", a}, {"b", b}});
  expect_grad_ok([&] { return sum_squares(sub(a, b)); }, {{"a", a}, {"b", b}});
  expect_grad_ok([&] { return sum_squares(mul(a, b)); }, {{"a", a}, {"b", b}});
  expect_grad_ok([&] { return sum(scale(a, -2.5)); }, {{"a", a}});
}

TEST(Autograd, AddRowBroadcasts) {
  Var a = Var::parameter(random_matrix(3, 2, 5));
  Var r = Var::parameter(random_matrix(1, 2, 6));
  const Var y = add_row(a, r);
  for (Index i = 0; i < 3; ++i) EXPECT_TRUE(y.value().row(i).isApprox(a.value().row(i) + r.value()));
  expect_grad_ok([&] { return sum_squares(add_row(a, r)); }, {{"a", a}, {"r", r}});
}

TEST(Autograd, ShapeOps) {
  Var a = Var::parameter(random_matrix(3, 4, 7));
  Var b = Var::parameter(random_matrix(3, 2, 8));
  EXPECT_TRUE(transpose(a).value().isApprox(a.value().transpose()));
  const std::vector<Var> parts{a, b};
  const Var c = concat_cols(parts);
  EXPECT_EQ(c.cols(), 6);
  EXPECT_TRUE(c.value().leftCols(4).isApprox(a.value()));
  EXPECT_TRUE(slice_cols(c, 4, 2).value().isApprox(b.value()));
  const Var r = reshape(a, 2, 6);
  for (Index i = 0; i < 12; ++i) EXPECT_EQ(r.value().data()[i], a.value().data()[i]);

  const Matrix w = random_matrix(6, 6, 9);
  expect_grad_ok([&] { return sum_squares(matmul(concat_cols(parts), Var::constant(w))); }, {{"a", a}, {"b", b}});
  expect_grad_ok([&] { return sum_squares(mul(slice_cols(a, 1, 2), slice_cols(a, 2, 2))); }, {{"a", a}});
  expect_grad_ok([&] { return sum_squares(matmul(transpose(a), a)); }, {{"a", a}});
  expect_grad_ok([&] { return sum_squares(matmul(reshape(a, 6, 2), Var::constant(w.topLeftCorner(2, 3)))); },
                 {{"a", a}});
}

TEST(Autograd, GeluMatchesErfForm) {
  Matrix x(1, 4);
  x << -2.0, 0.0, 1.0, 3.0;
  const Var y = gelu(Var::constant(x));
  for (Index i = 0; i < 4; ++i) {
    const double v = x(0, i);
    EXPECT_NEAR(y.value()(0, i), 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))), 1e-15);
  }
  EXPECT_NEAR(y.value()(0, 2), 0.8413447460685429, 1e-15);
  Var a = Var::parameter(random_matrix(3, 3, 10, -3, 3));
  expect_grad_ok([&] { return sum_squares(gelu(a)); }, {{"a", a}});
}

TEST(Autograd, LayerNormNormalizesRows) {
  Var a = Var::parameter(random_matrix(4, 6, 11, -2, 5));
  Var g = Var::parameter(Matrix::Ones(1, 6));
  Var b = Var::parameter(Matrix::Zero(1, 6));
  const Matrix y = layer_norm(a, g, b, 1e-6).value();
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(y.row(i).mean(), 0.0, 1e-12);
    EXPECT_NEAR((y.row(i).array() - y.row(i).mean()).square().mean(), 1.0, 1e-4);
  }
  g.mutable_value() = random_matrix(1, 6, 12);
  b.mutable_value() = random_matrix(1, 6, 13);
  const Matrix w = random_matrix(6, 2, 14);
  expect_grad_ok([&] { return sum_squares(matmul(layer_norm(a, g, b, 1e-6), Var::constant(w))); },
                 {{"a", a}, {"gamma", g}, {"beta", b}});
}

TEST(Autograd, SoftmaxRows) {
  Var a = Var::parameter(random_matrix(3, 5, 15, -4, 4));
  const Matrix y = softmax_rows(a).value();
  for (Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(y.row(i).sum(), 1.0, 1e-14);
    const double m = a.value().row(i).maxCoeff();
    const double z = (a.value().row(i).array() - m).exp().sum();
    for (Index j = 0; j < 5; ++j) EXPECT_NEAR(y(i, j), std::exp(a.value()(i, j) - m) / z, 1e-15);
  }
  const Matrix w = random_matrix(5, 5, 16);
  expect_grad_ok([&] { return sum_squares(matmul(softmax_rows(a), Var::constant(w))); }, {{"a", a}});
}

TEST(Autograd, ClampPassesGradientInsideRange) {
  Matrix x(1, 4);
  x << -0.5, 0.25, 0.75, 1.5;
  Var a = Var::parameter(x);
  const Var y = clamp(a, 0.0, 1.0);
  EXPECT_EQ(y.value()(0, 0), 0.0);
  EXPECT_EQ(y.value()(0, 3), 1.0);
  sum(y).backward();
  const Matrix g = a.grad();
  EXPECT_EQ(g(0, 0), 0.0);
  EXPECT_EQ(g(0, 1), 1.0);
  EXPECT_EQ(g(0, 2), 1.0);
  EXPECT_EQ(g(0, 3), 0.0);
}

TEST(Autograd, Reductions) {
  Var a = Var::parameter(random_matrix(2, 3, 17));
  EXPECT_NEAR(sum(a).scalar(), a.value().sum(), 1e-15);
  EXPECT_NEAR(sum_squares(a).scalar(), a.value().squaredNorm(), 1e-15);
  expect_grad_ok([&] { return sum(mul(a, a)); }, {{"a", a}});
}

TEST(Autograd, PowerNormalize) {
  Var a = Var::parameter(random_matrix(4, 6, 18));
  const Var y = power_normalize(a, 2.0);
  EXPECT_NEAR(y.value().squaredNorm() / 12.0, 2.0, 1e-12);
  const Matrix w = random_matrix(6, 3, 19);
  expect_grad_ok([&] { return sum_squares(matmul(power_normalize(a, 1.0), Var::constant(w))); }, {{"a", a}});
  EXPECT_THROW(power_normalize(Var::constant(Matrix::Zero(2, 2)), 1.0), DegenerateInput);
}

TEST(Autograd, ComplexScaleMatchesComplexProduct) {
  Var a = Var::parameter(random_matrix(2, 4, 20));
  const std::complex<double> h(0.3, -1.2);
  const Matrix y = complex_scale(a, h.real(), h.imag()).value();
  for (Index k = 0; k < 4; ++k) {
    const std::complex<double> x(a.value().data()[2 * k], a.value().data()[2 * k + 1]);
    const auto expected = h * x;
    EXPECT_NEAR(y.data()[2 * k], expected.real(), 1e-15);
    EXPECT_NEAR(y.data()[2 * k + 1], expected.imag(), 1e-15);
  }
  const Matrix w = random_matrix(4, 2, 21);
  expect_grad_ok([&] { return sum_squares(matmul(complex_scale(a, h.real(), h.imag()), Var::constant(w))); },
                 {{"a", a}});
}

TEST(Autograd, Im2colGathersZeroPaddedNeighbourhood) {
  const Index side = 3;
  const Index d = 2;
  Var a = Var::parameter(random_matrix(side * side, d, 22));
  const Matrix cols = im2col3x3(a, side).value();
  ASSERT_EQ(cols.cols(), 9 * d);
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      for (Index dy = -1; dy <= 1; ++dy) {
        for (Index dx = -1; dx <= 1; ++dx) {
          const Index tap = (dy + 1) * 3 + (dx + 1);
          const Index rr = r + dy;
          const Index cc = c + dx;
          for (Index ch = 0; ch < d; ++ch) {
            const double expected =
                (rr < 0 || cc < 0 || rr >= side || cc >= side) ? 0.0 : a.value()(rr * side + cc, ch);
            EXPECT_EQ(cols(r * side + c, tap * d + ch), expected);
          }
        }
      }
    }
  }
  const Matrix w = random_matrix(9 * d, 2, 23);
  expect_grad_ok([&] { return sum_squares(matmul(im2col3x3(a, side), Var::constant(w))); }, {{"a", a}});
}

TEST(Autograd, GatherPermutes) {
  Var a = Var::parameter(random_matrix(2, 3, 24));
  auto idx = std::make_shared<const std::vector<Index>>(std::vector<Index>{5, 4, 3, 2, 1, 0, 0});
  EXPECT_THROW(gather(a, idx, 2, 3), DimensionError);
  auto perm = std::make_shared<const std::vector<Index>>(std::vector<Index>{5, 4, 3, 2, 1, 0});
  const Var y = gather(a, perm, 3, 2);
  for (Index i = 0; i < 6; ++i) EXPECT_EQ(y.value().data()[i], a.value().data()[5 - i]);
  const Matrix w = random_matrix(2, 2, 25);
  expect_grad_ok([&] { return sum_squares(matmul(gather(a, perm, 3, 2), Var::constant(w))); }, {{"a", a}});
}

TEST(Autograd, SharedSubexpressionAccumulates) {
  Var a = Var::parameter(random_matrix(2, 2, 26));
  expect_grad_ok(
      [&] {
        const Var b = matmul(a, a);
        return sum_squares(add(b, mul(b, a)));
      },
      {{"a", a}});
}

TEST(Autograd, LeafGradientsAccumulateAcrossBackward) {
  Var a = Var::parameter(Matrix::Constant(1, 1, 3.0));
  sum_squares(a).backward();
  sum_squares(a).backward();
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 12.0);
  a.zero_grad();
  EXPECT_FALSE(a.has_grad());
  EXPECT_EQ(a.grad()(0, 0), 0.0);
}

TEST(Autograd, NoGradGuardRecordsNothing) {
  Var a = Var::parameter(random_matrix(2, 2, 27));
  Var y;
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    y = sum_squares(matmul(a, a));
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.is_leaf());
}

TEST(Autograd, DetachCutsGraph) {
  Var a = Var::parameter(Matrix::Constant(1, 1, 2.0));
  const Var y = mul(a.detach(), a);
  sum(y).backward();
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 2.0);
}

TEST(Autograd, ShapeErrors) {
  Var a = Var::constant(Matrix::Zero(2, 3));
  Var b = Var::constant(Matrix::Zero(2, 2));
  EXPECT_THROW(matmul(a, a), DimensionError);
  EXPECT_THROW(add(a, b), DimensionError);
  EXPECT_THROW(reshape(a, 4, 2), DimensionError);
  EXPECT_THROW(slice_cols(a, 2, 2), DimensionError);
  EXPECT_THROW(a.backward(), DimensionError);
}
