// losses.cc

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

#include "xvalign/losses.h"

#include "xvalign/error.h"

namespace xvalign {

Regime ParseRegime(const std::string& name) {
  if (name == "AMSM" || name == "amsm") return Regime::kAmsm;
  if (name == "IRL" || name == "irl") return Regime::kIrl;
  if (name == "LVC" || name == "lvc") return Regime::kLvc;
  if (name == "CA" || name == "ca") return Regime::kCa;
  throw ConfigError("unknown regime '" + name + "'");
}

std::string RegimeName(Regime r) {
  switch (r) {
    case Regime::kAmsm:
      return "AMSM";
    case Regime::kIrl:
      return "IRL";
    case Regime::kLvc:
      return "LVC";
    case Regime::kCa:
      return "CA";
  }
  return "?";
}

LossConfig LossConfig::Defaults(Regime regime) {
  LossConfig c;
  c.regime = regime;
  switch (regime) {
    case Regime::kAmsm:
      break;
    case Regime::kIrl:
    case Regime::kLvc:
      c.alpha = 1.0;
      c.gamma = 0.5;
      c.lambda = 0.5;
      break;
    case Regime::kCa:
      c.alpha = 0.0;
      c.gamma = 0.5;
      c.lambda = 0.01;
      break;
  }
  return c;
}

void LossConfig::Validate() const {
  if (gamma < 0.0 || lambda < 0.0) {
    throw ConfigError("loss: gamma and lambda must be non-negative");
  }
  if (scale <= 0.0) throw ConfigError("loss: scale must be positive");
  switch (regime) {
    case Regime::kAmsm:
      if (alpha != 0.0 || gamma != 0.0 || lambda != 0.0) {
        throw ConfigError("loss: AMSM takes no partner, so alpha, gamma and "
                          "lambda must be 0");
      }
      break;
    case Regime::kIrl:
    case Regime::kLvc:
      if (alpha != 1.0) {
        throw ConfigError("loss: " + RegimeName(regime) + " requires alpha=1");
      }
      break;
    case Regime::kCa:
      if (alpha != 0.0) throw ConfigError("loss: CA requires alpha=0");
      break;
  }
}

nc::Var am_softmax_from_cosines(const nc::Var& cosines, Eigen::Index label,
                                double margin, double scale) {
  if (cosines.rows() != 1) {
    throw DimensionError("am_softmax: expected a 1xN cosine row");
  }
  if (label < 0 || label >= cosines.cols()) {
    throw InputError("am_softmax: label " + std::to_string(label) +
                     " out of range");
  }
  nc::Matrix shift = nc::Matrix::Zero(1, cosines.cols());
  shift(0, label) = -margin;
  const nc::Var logits =
      nc::scale(nc::add(cosines, nc::Var::Constant(std::move(shift))), scale);
  return nc::cross_entropy(logits, label);
}

nc::Var am_softmax(const nc::Var& input, const nc::Var& class_weights,
                   Eigen::Index label, double margin, double scale) {
  if (input.cols() != class_weights.cols()) {
    throw DimensionError("am_softmax: input and class weights differ in width");
  }
  const nc::Var cosines =
      nc::matmul(nc::l2_normalize_rows(input),
                 nc::transpose(nc::l2_normalize_rows(class_weights)));
  return am_softmax_from_cosines(cosines, label, margin, scale);
}

nc::Var cos_loss(const nc::Var& a, const nc::Var& b) {
  if (a.rows() != 1 || b.rows() != 1 || a.cols() != b.cols()) {
    throw DimensionError("cos_loss: expected two 1xE rows of equal width");
  }
  return nc::sum(nc::mul(nc::l2_normalize_rows(a), nc::l2_normalize_rows(b)));
}

nc::Var l2_loss(const nc::Var& a, const nc::Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("l2_loss: shape mismatch");
  }
  return nc::scale(nc::sum(nc::square(nc::sub(a, b))),
                   1.0 / static_cast<double>(a.value().size()));
}

namespace {

LossTerms WithPartner(const ForwardResult& x, const nc::Var* xp_cosines,
                      const nc::Var& partner, Eigen::Index label,
                      const LossConfig& cfg) {
  LossTerms t;
  const nc::Var am_x =
      am_softmax_from_cosines(x.cosines, label, cfg.margin, cfg.scale);
  t.am_x = am_x.item();
  nc::Var total = am_x;
  if (xp_cosines != nullptr) {
    const nc::Var am_xp =
        am_softmax_from_cosines(*xp_cosines, label, cfg.margin, cfg.scale);
    t.am_xp = am_xp.item();
    if (cfg.alpha != 0.0) total = nc::add(total, nc::scale(am_xp, cfg.alpha));
  }
  const nc::Var c = cos_loss(x.embedding, partner);
  const nc::Var l2 = l2_loss(x.embedding, partner);
  t.cos = c.item();
  t.l2 = l2.item();
  if (cfg.gamma != 0.0) total = nc::sub(total, nc::scale(c, cfg.gamma));
  if (cfg.lambda != 0.0) total = nc::add(total, nc::scale(l2, cfg.lambda));
  t.total = total;
  return t;
}

}  // namespace

LossTerms combined_loss(const ForwardResult& x, Eigen::Index label,
                        const LossConfig& cfg) {
  cfg.Validate();
  if (cfg.regime != Regime::kAmsm) {
    throw ConfigError("combined_loss: " + RegimeName(cfg.regime) +
                      " needs an alignment partner");
  }
  LossTerms t;
  t.total = am_softmax_from_cosines(x.cosines, label, cfg.margin, cfg.scale);
  t.am_x = t.total.item();
  return t;
}

LossTerms combined_loss(const ForwardResult& x, const ForwardResult& xp,
                        Eigen::Index label, const LossConfig& cfg) {
  cfg.Validate();
  if (!cfg.uses_pairs()) {
    throw ConfigError("combined_loss: " + RegimeName(cfg.regime) +
                      " does not train on pairs");
  }
  return WithPartner(x, &xp.cosines, xp.embedding, label, cfg);
}

LossTerms combined_loss(const ForwardResult& x, const nc::Var& centroid,
                        Eigen::Index label, const LossConfig& cfg) {
  cfg.Validate();
  if (cfg.regime != Regime::kCa) {
    throw ConfigError("combined_loss: centroid partner requires CA");
  }
  if (centroid.requires_grad()) {
    throw ContractError("combined_loss: the CA centroid must be a constant");
  }
  return WithPartner(x, nullptr, centroid, label, cfg);
}

}  // namespace xvalign
