// numcore.cc

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

#include "xvalign/numcore.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>

#include "xvalign/error.h"

namespace xvalign::nc {

namespace {

using internal::Node;

std::string ShapeStr(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void RequireSameShape(const Var& a, const Var& b, std::string_view op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeStr(a.value()) + " vs " + ShapeStr(b.value()));
  }
}

Node& Parent(Node& n, std::size_t i) { return *n.parents[i]; }

}  // namespace

void internal::Node::AccumulateGrad(const Matrix& g) { AccumulateGradExpr(g); }

Var Var::Constant(Matrix value) {
  if (!value.allFinite()) throw NumericError("constant: non-finite value");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "constant";
  n->is_leaf = true;
  return Var(std::move(n));
}

Var Var::Parameter(Matrix value) {
  if (!value.allFinite()) throw NumericError("parameter: non-finite value");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "parameter";
  n->is_leaf = true;
  n->requires_grad = true;
  return Var(std::move(n));
}

Var Var::Scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Constant(std::move(m));
}

Matrix Var::grad() const {
  if (node_->grad.size() == 0) {
    return Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

double Var::item() const {
  if (node_->value.size() != 1) {
    throw ContractError("item() on a " + ShapeStr(node_->value) + " value");
  }
  return node_->value(0, 0);
}

Var MakeResult(Matrix value, std::string_view op, std::vector<Var> parents,
               std::function<void(internal::Node&)> backward) {
  if (!value.allFinite()) {
    throw NumericError(std::string(op) + ": non-finite result");
  }
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  for (const Var& p : parents) {
    n->requires_grad = n->requires_grad || p.requires_grad();
    n->parents.push_back(p.node());
  }
  if (n->requires_grad) n->backward = std::move(backward);
  return Var(std::move(n));
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + ShapeStr(a.value()) + " x " +
                         ShapeStr(b.value()));
  }
  Matrix out;
  out.noalias() = a.value() * b.value();
  return MakeResult(std::move(out), "matmul", {a, b}, [](Node& n) {
    Node& pa = Parent(n, 0);
    Node& pb = Parent(n, 1);
    if (pa.requires_grad) {
      Matrix g;
      g.noalias() = n.grad * pb.value.transpose();
      pa.AccumulateGrad(g);
    }
    if (pb.requires_grad) {
      Matrix g;
      g.noalias() = pa.value.transpose() * n.grad;
      pb.AccumulateGrad(g);
    }
  });
}

Var add(const Var& a, const Var& b) {
  RequireSameShape(a, b, "add");
  return MakeResult(a.value() + b.value(), "add", {a, b}, [](Node& n) {
    for (auto& p : n.parents) {
      if (p->requires_grad) p->AccumulateGrad(n.grad);
    }
  });
}

Var sub(const Var& a, const Var& b) {
  RequireSameShape(a, b, "sub");
  return MakeResult(a.value() - b.value(), "sub", {a, b}, [](Node& n) {
    if (Parent(n, 0).requires_grad) Parent(n, 0).AccumulateGrad(n.grad);
    if (Parent(n, 1).requires_grad) Parent(n, 1).AccumulateGradExpr(-n.grad);
  });
}

Var mul(const Var& a, const Var& b) {
  RequireSameShape(a, b, "mul");
  return MakeResult(a.value().cwiseProduct(b.value()), "mul", {a, b},
                    [](Node& n) {
                      Node& pa = Parent(n, 0);
                      Node& pb = Parent(n, 1);
                      if (pa.requires_grad) {
                        pa.AccumulateGradExpr(n.grad.cwiseProduct(pb.value));
                      }
                      if (pb.requires_grad) {
                        pb.AccumulateGradExpr(n.grad.cwiseProduct(pa.value));
                      }
                    });
}

Var scale(const Var& a, double c) {
  return MakeResult(a.value() * c, "scale", {a}, [c](Node& n) {
    Parent(n, 0).AccumulateGradExpr(n.grad * c);
  });
}

Var transpose(const Var& a) {
  return MakeResult(a.value().transpose(), "transpose", {a}, [](Node& n) {
    Parent(n, 0).AccumulateGradExpr(n.grad.transpose());
  });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: " + ShapeStr(a.value()) + " + row " +
                         ShapeStr(row.value()));
  }
  Matrix out = a.value().rowwise() + row.value().row(0);
  return MakeResult(std::move(out), "add_row", {a, row}, [](Node& n) {
    if (Parent(n, 0).requires_grad) Parent(n, 0).AccumulateGrad(n.grad);
    if (Parent(n, 1).requires_grad) {
      Parent(n, 1).AccumulateGradExpr(n.grad.colwise().sum());
    }
  });
}

Var relu(const Var& x) {
  return MakeResult(x.value().cwiseMax(0.0), "relu", {x}, [](Node& n) {
    Node& p = Parent(n, 0);
    p.AccumulateGradExpr(
        (p.value.array() > 0.0).select(n.grad.array(), 0.0).matrix());
  });
}

Var sigmoid(const Var& x) {
  Matrix out = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  return MakeResult(std::move(out), "sigmoid", {x}, [](Node& n) {
    const auto y = n.value.array();
    Parent(n, 0).AccumulateGradExpr(
        (n.grad.array() * y * (1.0 - y)).matrix());
  });
}

Var softmax(const Var& x, int axis) {
  if (axis != 0 && axis != 1) {
    throw ContractError("softmax: axis must be 0 or 1");
  }
  Matrix out(x.rows(), x.cols());
  if (axis == 0) {
    const Eigen::RowVectorXd mx = x.value().colwise().maxCoeff();
    out = (x.value().rowwise() - mx).array().exp().matrix();
    const Eigen::RowVectorXd z = out.colwise().sum();
    out.array().rowwise() /= z.array();
  } else {
    const Eigen::VectorXd mx = x.value().rowwise().maxCoeff();
    out = (x.value().colwise() - mx).array().exp().matrix();
    const Eigen::VectorXd z = out.rowwise().sum();
    out.array().colwise() /= z.array();
  }
  return MakeResult(std::move(out), "softmax", {x}, [axis](Node& n) {
    // dx = y * (g - sum(g * y)) along the normalized axis.
    const Matrix gy = n.grad.cwiseProduct(n.value);
    Matrix dx;
    if (axis == 0) {
      const Eigen::RowVectorXd s = gy.colwise().sum();
      dx = gy - (n.value.array().rowwise() * s.array()).matrix();
    } else {
      const Eigen::VectorXd s = gy.rowwise().sum();
      dx = gy - (n.value.array().colwise() * s.array()).matrix();
    }
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var square(const Var& x) {
  return MakeResult(x.value().array().square().matrix(), "square", {x},
                    [](Node& n) {
                      Node& p = Parent(n, 0);
                      p.AccumulateGradExpr(
                          (2.0 * n.grad.array() * p.value.array()).matrix());
                    });
}

Var sqrt(const Var& x) {
  if ((x.value().array() < 0.0).any()) {
    throw NumericError("sqrt: negative input");
  }
  return MakeResult(x.value().array().sqrt().matrix(), "sqrt", {x},
                    [](Node& n) {
                      Parent(n, 0).AccumulateGradExpr(
                          (0.5 * n.grad.array() / n.value.array()).matrix());
                    });
}

Var clamp_min(const Var& x, double floor) {
  return MakeResult(x.value().cwiseMax(floor), "clamp_min", {x},
                    [floor](Node& n) {
                      Node& p = Parent(n, 0);
                      p.AccumulateGradExpr((p.value.array() > floor)
                                               .select(n.grad.array(), 0.0)
                                               .matrix());
                    });
}

Var sum(const Var& x) {
  return MakeResult(Matrix::Constant(1, 1, x.value().sum()), "sum", {x},
                    [](Node& n) {
                      Node& p = Parent(n, 0);
                      p.AccumulateGradExpr(Matrix::Constant(
                          p.value.rows(), p.value.cols(), n.grad(0, 0)));
                    });
}

Var sum_rows(const Var& x) {
  return MakeResult(x.value().colwise().sum(), "sum_rows", {x}, [](Node& n) {
    Node& p = Parent(n, 0);
    p.AccumulateGradExpr(n.grad.replicate(p.value.rows(), 1));
  });
}

Var mean_rows(const Var& x) {
  if (x.rows() == 0) throw InputError("mean_rows: empty input");
  return scale(sum_rows(x), 1.0 / static_cast<double>(x.rows()));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row count mismatch");
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return MakeResult(std::move(out), "concat_cols",
                    std::vector<Var>(parts.begin(), parts.end()), [](Node& n) {
                      Eigen::Index c0 = 0;
                      for (auto& p : n.parents) {
                        const Eigen::Index w = p->value.cols();
                        if (p->requires_grad) {
                          p->AccumulateGradExpr(n.grad.middleCols(c0, w));
                        }
                        c0 += w;
                      }
                    });
}

Var repeat_cols(const Var& x, Eigen::Index width) {
  if (width <= 0) throw ContractError("repeat_cols: width must be positive");
  const Eigen::Index k = x.cols();
  Matrix out(x.rows(), k * width);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.middleCols(j * width, width) = x.value().col(j).replicate(1, width);
  }
  return MakeResult(std::move(out), "repeat_cols", {x}, [k, width](Node& n) {
    Matrix g(n.grad.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      g.col(j) = n.grad.middleCols(j * width, width).rowwise().sum();
    }
    Parent(n, 0).AccumulateGrad(g);
  });
}

Var splice(const Var& x, std::span<const int> offsets) {
  if (offsets.empty()) throw ContractError("splice: empty offset list");
  const auto [lo_it, hi_it] = std::minmax_element(offsets.begin(), offsets.end());
  const int lo = *lo_it;
  const int span = *hi_it - lo;
  const Eigen::Index t_out = x.rows() - span;
  if (t_out < 1) {
    throw InputError("splice: " + std::to_string(x.rows()) +
                     " frames too few for context span " +
                     std::to_string(span));
  }
  const Eigen::Index d = x.cols();
  std::vector<int> offs(offsets.begin(), offsets.end());
  Matrix out(t_out, d * static_cast<Eigen::Index>(offs.size()));
  for (std::size_t i = 0; i < offs.size(); ++i) {
    out.middleCols(static_cast<Eigen::Index>(i) * d, d) =
        x.value().middleRows(offs[i] - lo, t_out);
  }
  return MakeResult(std::move(out), "splice", {x},
                    [offs = std::move(offs), lo, d, t_out](Node& n) {
                      Node& p = Parent(n, 0);
                      Matrix g = Matrix::Zero(p.value.rows(), d);
                      for (std::size_t i = 0; i < offs.size(); ++i) {
                        g.middleRows(offs[i] - lo, t_out) += n.grad.middleCols(
                            static_cast<Eigen::Index>(i) * d, d);
                      }
                      p.AccumulateGrad(g);
                    });
}

Var l2_normalize_rows(const Var& x) {
  const Eigen::VectorXd norms = x.value().rowwise().norm();
  if ((norms.array() <= 0.0).any()) {
    throw NumericError("l2_normalize_rows: zero-norm row");
  }
  Matrix out = x.value().array().colwise() / norms.array();
  return MakeResult(std::move(out), "l2_normalize", {x}, [norms](Node& n) {
    // d(x/|x|) = (g - y (g.y)) / |x|
    const Eigen::VectorXd gy = n.grad.cwiseProduct(n.value).rowwise().sum();
    Matrix dx = n.grad - (n.value.array().colwise() * gy.array()).matrix();
    dx.array().colwise() /= norms.array();
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var cross_entropy(const Var& logits, Eigen::Index label) {
  if (logits.rows() != 1) {
    throw DimensionError("cross_entropy: expected a 1xN logit row, got " +
                         ShapeStr(logits.value()));
  }
  if (label < 0 || label >= logits.cols()) {
    throw InputError("cross_entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(logits.cols()) +
                     " classes");
  }
  const auto z = logits.value().row(0).array();
  const double mx = z.maxCoeff();
  const Eigen::ArrayXd e = (z - mx).exp().transpose();
  const double lse = mx + std::log(e.sum());
  const double loss = lse - z(label);
  Eigen::RowVectorXd probs = (e / e.sum()).matrix().transpose();
  return MakeResult(Matrix::Constant(1, 1, loss), "cross_entropy", {logits},
                    [probs = std::move(probs), label](Node& n) {
                      Matrix g = probs;
                      g(0, label) -= 1.0;
                      Parent(n, 0).AccumulateGradExpr(g * n.grad(0, 0));
                    });
}

void backward(const Var& root) {
  if (!root.defined() || root.value().size() != 1) {
    throw ContractError("backward: root must be a 1x1 scalar");
  }
  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (!n->is_leaf) n->grad.resize(0, 0);
  }
  if (!root.requires_grad()) return;
  Node* r = root.node().get();
  r->AccumulateGrad(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->is_leaf || !n->backward || n->grad.size() == 0) continue;
    n->backward(*n);
  }
}

GradCheckReport check_gradients(const std::function<Var()>& loss,
                                std::span<Var> params, double eps,
                                std::size_t max_coordinates,
                                std::uint64_t seed, double rel_floor) {
  for (Var& p : params) p.zero_grad();
  const Var root = loss();
  backward(root);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Var& p : params) analytic.push_back(p.grad());

  // (param index, flat coordinate) pairs to probe.
  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (Eigen::Index j = 0; j < params[i].value().size(); ++j) {
      coords.emplace_back(i, j);
    }
  }
  if (coords.size() > max_coordinates) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(max_coordinates);
  }

  GradCheckReport report;
  for (const auto& [i, j] : coords) {
    double& x = params[i].mutable_value().data()[j];
    const double saved = x;
    x = saved + eps;
    const double up = loss().item();
    x = saved - eps;
    const double down = loss().item();
    x = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double a = analytic[i].data()[j];
    const double abs_err = std::abs(a - numeric);
    const double denom =
        std::max({std::abs(a), std::abs(numeric), rel_floor});
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    report.max_rel_error = std::max(report.max_rel_error, abs_err / denom);
    ++report.coordinates;
  }
  for (Var& p : params) p.zero_grad();
  return report;
}

}  // namespace xvalign::nc
