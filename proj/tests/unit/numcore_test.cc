// tests/unit/numcore_test.cc

// Copyright 2026 The xvalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_util.h"
#include "xvalign/error.h"
#include "xvalign/numcore.h"

namespace xvalign {
namespace {

using nc::Matrix;
using nc::Var;
using testing::MaxRelError;
using testing::NumericGrad;
using testing::RandomMatrix;

Matrix M(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

TEST(Matmul, IdentityTimesMatrix) {
  const Matrix m = M({{1.5, -2}, {3, 4}});
  const Var out = nc::matmul(Var::Constant(Matrix::Identity(2, 2)),
                             Var::Constant(m));
  EXPECT_EQ(out.value(), m);
}

TEST(Matmul, HandComputation) {
  const Var out = nc::matmul(Var::Constant(M({{1, 2}, {3, 4}})),
                             Var::Constant(M({{1}, {1}})));
  EXPECT_EQ(out.value(), M({{3}, {7}}));
}

TEST(Matmul, ShapeMismatchIsDimensionError) {
  EXPECT_THROW(nc::matmul(Var::Constant(Matrix::Zero(2, 3)),
                          Var::Constant(Matrix::Zero(2, 3))),
               DimensionError);
}

TEST(Matmul, GradientMatchesCentralDifferences) {
  Rng rng(3);
  Var a = Var::Parameter(RandomMatrix(rng, 5, 7));
  Var b = Var::Parameter(RandomMatrix(rng, 7, 3));
  const Matrix r = RandomMatrix(rng, 5, 3);
  auto loss = [&] {
    return nc::sum(nc::mul(nc::matmul(a, b), Var::Constant(r)));
  };
  nc::backward(loss());
  auto f = [&] { return loss().item(); };
  EXPECT_LT(MaxRelError(a.grad(), NumericGrad(f, a)), 1e-6);
  EXPECT_LT(MaxRelError(b.grad(), NumericGrad(f, b)), 1e-6);
  // Closed form: dA = G B^T, dB = A^T G with G = r.
  EXPECT_LT((a.grad() - r * b.value().transpose()).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LT((b.grad() - a.value().transpose() * r).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Activations, ReluAndSigmoidValues) {
  const Var x = Var::Constant(M({{-1, 3, 0}}));
  EXPECT_EQ(nc::relu(x).value(), M({{0, 3, 0}}));
  EXPECT_DOUBLE_EQ(nc::sigmoid(Var::Scalar(0.0)).item(), 0.5);
}

TEST(Activations, SoftmaxSlicesSumToOne) {
  Rng rng(5);
  const Var x = Var::Constant(RandomMatrix(rng, 6, 4, -20, 20));
  const Matrix s0 = nc::softmax(x, 0).value();
  const Matrix s1 = nc::softmax(x, 1).value();
  for (Eigen::Index c = 0; c < 4; ++c) {
    EXPECT_NEAR(s0.col(c).sum(), 1.0, 1e-12);
  }
  for (Eigen::Index r = 0; r < 6; ++r) {
    EXPECT_NEAR(s1.row(r).sum(), 1.0, 1e-12);
  }
}

TEST(Activations, SoftmaxIsStableForLargeInputs) {
  const Var x = Var::Constant(M({{1000, 1001, 999}}));
  const Matrix s = nc::softmax(x, 1).value();
  EXPECT_TRUE(s.allFinite());
  EXPECT_NEAR(s.sum(), 1.0, 1e-12);
}

TEST(Backward, SumOfProductGivesInputBroadcast) {
  // root = sum(W x): dW[i][j] = x[j].
  Rng rng(7);
  Var w = Var::Parameter(RandomMatrix(rng, 3, 4));
  const Matrix x = RandomMatrix(rng, 4, 1);
  nc::backward(nc::sum(nc::matmul(w, Var::Constant(x))));
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_DOUBLE_EQ(w.grad()(i, j), x(j, 0));
    }
  }
}

TEST(Backward, NonScalarRootIsContractError) {
  Var w = Var::Parameter(Matrix::Ones(2, 2));
  EXPECT_THROW(nc::backward(nc::scale(w, 2.0)), ContractError);
}

TEST(Backward, ConstantGraphGivesZeroGradients) {
  const Var c = Var::Constant(Matrix::Ones(2, 2));
  const Var root = nc::sum(nc::square(c));
  nc::backward(root);
  EXPECT_FALSE(c.has_grad());
  EXPECT_EQ(c.grad(), Matrix::Zero(2, 2));
}

TEST(Backward, SharedNodeAccumulatesFromEveryConsumer) {
  // y = x * x through two paths of the same node: d/dx sum(x .* x) = 2x.
  Var x = Var::Parameter(M({{1.5, -2.0}}));
  const Var y = nc::sum(nc::mul(x, x));
  nc::backward(y);
  EXPECT_EQ(x.grad(), M({{3.0, -4.0}}));
}

TEST(Backward, LeafGradientsAccumulateAcrossCalls) {
  Var x = Var::Parameter(M({{2.0}}));
  nc::backward(nc::scale(x, 3.0));
  nc::backward(nc::scale(x, 3.0));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 6.0);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

TEST(Backward, IsLinearInTheLoss) {
  Rng rng(11);
  Var w = Var::Parameter(RandomMatrix(rng, 4, 3));
  const Var in = Var::Constant(RandomMatrix(rng, 5, 4));
  auto l1 = [&] { return nc::sum(nc::square(nc::matmul(in, w))); };
  auto l2 = [&] { return nc::sum(nc::sigmoid(nc::matmul(in, w))); };
  nc::backward(l1());
  const Matrix g1 = w.grad();
  w.zero_grad();
  nc::backward(l2());
  const Matrix g2 = w.grad();
  w.zero_grad();
  const double a = 0.7, b = -2.5;
  nc::backward(nc::add(nc::scale(l1(), a), nc::scale(l2(), b)));
  EXPECT_LT((w.grad() - (a * g1 + b * g2)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Backward, RepeatedPassesAreBitIdentical) {
  Rng rng(13);
  Var w = Var::Parameter(RandomMatrix(rng, 6, 6));
  const Var in = Var::Constant(RandomMatrix(rng, 9, 6));
  auto run = [&] {
    w.zero_grad();
    const Var out = nc::sum(nc::softmax(nc::relu(nc::matmul(in, w)), 0));
    nc::backward(nc::sum(nc::square(nc::matmul(in, w))));
    return std::make_pair(out.item(), w.grad());
  };
  const auto first = run();
  const auto second = run();
  EXPECT_EQ(first.first, second.first);
  EXPECT_EQ(first.second, second.second);
}

TEST(Numeric, NonFiniteResultIsNumericError) {
  const Var x = Var::Constant(M({{std::numeric_limits<double>::max()}}));
  EXPECT_THROW(nc::scale(x, 10.0), NumericError);
}

TEST(Numeric, ZeroRowNormalizationIsNumericError) {
  EXPECT_THROW(nc::l2_normalize_rows(Var::Constant(Matrix::Zero(1, 3))),
               NumericError);
}

TEST(Shapes, SpliceDropsTheContextSpan) {
  Rng rng(17);
  const Matrix x = RandomMatrix(rng, 10, 3);
  const std::vector<int> ctx = {-2, 0, 2};
  const Matrix out = nc::splice(Var::Constant(x), ctx).value();
  ASSERT_EQ(out.rows(), 6);
  ASSERT_EQ(out.cols(), 9);
  for (Eigen::Index t = 0; t < 6; ++t) {
    EXPECT_EQ(out.row(t).segment(0, 3), x.row(t));
    EXPECT_EQ(out.row(t).segment(3, 3), x.row(t + 2));
    EXPECT_EQ(out.row(t).segment(6, 3), x.row(t + 4));
  }
}

TEST(Shapes, RepeatColsRepeatsEachColumn) {
  const Matrix out = nc::repeat_cols(Var::Constant(M({{1, 2}})), 3).value();
  EXPECT_EQ(out, M({{1, 1, 1, 2, 2, 2}}));
}

TEST(Shapes, CrossEntropyMatchesClosedForm) {
  const Matrix logits = M({{0.5, -1.0, 2.0}});
  const double expected =
      -std::log(std::exp(-1.0) /
                (std::exp(0.5) + std::exp(-1.0) + std::exp(2.0)));
  EXPECT_NEAR(nc::cross_entropy(Var::Constant(logits), 1).item(), expected,
              1e-12);
}

// Every registered op against an independent central-difference oracle.
class OpGradient : public ::testing::TestWithParam<int> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  Rng rng(100 + GetParam());
  const int r = 2 + GetParam() % 4, c = 2 + (GetParam() * 7) % 5;
  Var x = Var::Parameter(RandomMatrix(rng, r, c, 0.2, 1.5));
  Var y = Var::Parameter(RandomMatrix(rng, r, c, -1, 1));
  Var row = Var::Parameter(RandomMatrix(rng, 1, c));
  Var wt = Var::Parameter(RandomMatrix(rng, c, 3));
  const Matrix probe_rc = RandomMatrix(rng, r, c);
  const std::vector<int> ctx = {-1, 0, 1};
  const std::vector<std::pair<std::string, std::function<Var()>>> ops = {
      {"matmul", [&] { return nc::sum(nc::square(nc::matmul(x, wt))); }},
      {"add", [&] { return nc::sum(nc::square(nc::add(x, y))); }},
      {"sub", [&] { return nc::sum(nc::square(nc::sub(x, y))); }},
      {"mul", [&] { return nc::sum(nc::mul(nc::mul(x, y), x)); }},
      {"scale", [&] { return nc::sum(nc::square(nc::scale(x, -1.7))); }},
      {"transpose",
       [&] { return nc::sum(nc::matmul(nc::transpose(x), y)); }},
      {"add_row", [&] { return nc::sum(nc::square(nc::add_row(x, row))); }},
      {"relu",
       [&] {
         return nc::sum(nc::mul(nc::relu(y), Var::Constant(probe_rc)));
       }},
      {"sigmoid", [&] { return nc::sum(nc::square(nc::sigmoid(y))); }},
      {"softmax0",
       [&] {
         return nc::sum(nc::mul(nc::softmax(y, 0), Var::Constant(probe_rc)));
       }},
      {"softmax1",
       [&] {
         return nc::sum(nc::mul(nc::softmax(y, 1), Var::Constant(probe_rc)));
       }},
      {"sqrt", [&] { return nc::sum(nc::sqrt(x)); }},
      {"clamp_min", [&] { return nc::sum(nc::square(nc::clamp_min(y, 0.1))); }},
      {"sum_rows", [&] { return nc::sum(nc::square(nc::sum_rows(y))); }},
      {"mean_rows", [&] { return nc::sum(nc::square(nc::mean_rows(y))); }},
      {"concat_cols",
       [&] {
         const Var parts[] = {x, y};
         return nc::sum(nc::square(nc::concat_cols(parts)));
       }},
      {"repeat_cols",
       [&] { return nc::sum(nc::square(nc::repeat_cols(y, 3))); }},
      {"splice",
       [&] { return nc::sum(nc::square(nc::splice(nc::transpose(wt), ctx))); }},
      {"l2_normalize_rows",
       [&] {
         return nc::sum(
             nc::mul(nc::l2_normalize_rows(y), Var::Constant(probe_rc)));
       }},
      {"cross_entropy",
       [&] { return nc::cross_entropy(nc::sum_rows(y), 1); }},
  };
  for (const auto& [name, loss] : ops) {
    for (Var* v : {&x, &y, &row, &wt}) v->zero_grad();
    nc::backward(loss());
    auto f = [&] { return loss().item(); };
    for (Var* v : {&x, &y, &row, &wt}) {
      const Matrix numeric = NumericGrad(f, *v);
      EXPECT_LT(MaxRelError(v->grad(), numeric), 1e-4) << name;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(RandomShapes, OpGradient, ::testing::Range(0, 5));

TEST(CheckGradients, ReportsAgreementAndDetectsWrongGradients) {
  Rng rng(19);
  Var w = Var::Parameter(RandomMatrix(rng, 3, 3));
  const Var in = Var::Constant(RandomMatrix(rng, 4, 3));
  std::vector<Var> params = {w};
  const nc::GradCheckReport ok = nc::check_gradients(
      [&] { return nc::sum(nc::sigmoid(nc::matmul(in, w))); }, params);
  EXPECT_LT(ok.max_rel_error, 1e-6);
  EXPECT_EQ(ok.coordinates, 9u);

  // An op whose backward is deliberately wrong (factor 2) must be caught.
  auto bad_square = [](const Var& x) {
    Matrix v = x.value().array().square().matrix();
    return nc::MakeResult(std::move(v), "bad_square", {x},
                          [x](nc::internal::Node& self) {
                            x.node()->AccumulateGrad(
                                (4.0 * x.value().array() * self.grad.array())
                                    .matrix());
                          });
  };
  const nc::GradCheckReport bad = nc::check_gradients(
      [&] { return nc::sum(bad_square(nc::matmul(in, w))); }, params);
  EXPECT_GT(bad.max_rel_error, 0.1);
}

}  // namespace
}  // namespace xvalign
