// xvalign/numcore.h

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

#ifndef XVALIGN_NUMCORE_H_
#define XVALIGN_NUMCORE_H_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace xvalign::nc {

/// Dense row-major 64-bit matrix. Vectors are 1xN rows.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Var;

namespace internal {

struct Node {
  Matrix value;
  Matrix grad;  // empty until the first gradient reaches this node
  std::string_view op;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;
  bool requires_grad = false;
  bool is_leaf = false;

  void AccumulateGrad(const Matrix& g);
  template <typename Expr>
  void AccumulateGradExpr(const Expr& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

}  // namespace internal

/**
   Handle to a node in a reverse-mode differentiation graph.

   Vars are cheap to copy (shared ownership of the node).  A graph is built
   by calling the free functions below; each result remembers its parents
   and how to push gradients back to them.  Leaves are either constants
   (never receive gradients) or parameters (gradients accumulate across
   backward() calls until zero_grad()).
*/
class Var {
 public:
  Var() = default;

  static Var Constant(Matrix value);
  static Var Parameter(Matrix value);
  static Var Scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  /// Gradient of the last backward root(s); zero matrix of the value's
  /// shape when nothing has flowed here.
  Matrix grad() const;
  bool has_grad() const { return node_->grad.size() != 0; }
  void zero_grad() { node_->grad.resize(0, 0); }
  /// Direct access for optimizers and finite-difference probes.
  Matrix& mutable_value() { return node_->value; }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;
  bool requires_grad() const { return node_->requires_grad; }
  std::string_view op() const { return node_->op; }

  const std::shared_ptr<internal::Node>& node() const { return node_; }

 private:
  friend Var MakeResult(Matrix value, std::string_view op,
                        std::vector<Var> parents,
                        std::function<void(internal::Node&)> backward);
  explicit Var(std::shared_ptr<internal::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<internal::Node> node_;
};

/// Builds an interior node.  Throws NumericError if `value` is not finite.
Var MakeResult(Matrix value, std::string_view op, std::vector<Var> parents,
               std::function<void(internal::Node&)> backward);

// Linear algebra.
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product.
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var transpose(const Var& a);
/// Adds a 1xC row to every row of a (bias broadcast).
Var add_row(const Var& a, const Var& row);

// Nonlinearities.
Var relu(const Var& x);
Var sigmoid(const Var& x);
/// axis 0 normalizes each column over rows, axis 1 each row over columns.
Var softmax(const Var& x, int axis);
Var square(const Var& x);
Var sqrt(const Var& x);
/// max(x, floor) elementwise; gradient passes only where x > floor.
Var clamp_min(const Var& x, double floor);

// Reductions and reshaping.
Var sum(const Var& x);
/// Column sums, 1xC.
Var sum_rows(const Var& x);
Var mean_rows(const Var& x);
Var concat_cols(std::span<const Var> parts);
/// Each column is repeated `width` times: TxK -> Tx(K*width).
Var repeat_cols(const Var& x, Eigen::Index width);
/// Temporal context splicing.  Output row t is the concatenation of input
/// rows t - min(offsets) + o for o in offsets; T shrinks by the span.
Var splice(const Var& x, std::span<const int> offsets);
/// Each row divided by its L2 norm.  Throws NumericError on a zero row.
Var l2_normalize_rows(const Var& x);

/// -log softmax(logits)[label] for a 1xN logit row.
Var cross_entropy(const Var& logits, Eigen::Index label);

/**
   Reverse pass from a 1x1 root.  Interior gradients are recomputed from
   scratch on every call; parameter gradients accumulate.  Nodes are visited
   once each, in reverse topological order.  Throws ContractError if the
   root is not scalar.
*/
void backward(const Var& root);

/// Result of a central-difference comparison.
struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t coordinates = 0;
};

/**
   Compares analytic gradients of `loss` against central differences for a
   sample of parameter coordinates (all coordinates when the parameters hold
   at most `max_coordinates` values).  The relative error of one coordinate
   is |analytic - numeric| / max(|analytic|, |numeric|, rel_floor).
*/
GradCheckReport check_gradients(const std::function<Var()>& loss,
                                std::span<Var> params, double eps = 1e-6,
                                std::size_t max_coordinates = 2000,
                                std::uint64_t seed = 0,
                                double rel_floor = 1e-4);

}  // namespace xvalign::nc

#endif  // XVALIGN_NUMCORE_H_
