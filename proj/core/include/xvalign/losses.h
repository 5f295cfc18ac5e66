// xvalign/losses.h

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

#ifndef XVALIGN_LOSSES_H_
#define XVALIGN_LOSSES_H_

#include <string>

#include "xvalign/model.h"
#include "xvalign/numcore.h"

namespace xvalign {

/// Training regime.  AMSM is the plain margin-softmax baseline; IRL aligns
/// clean/corrupted pairs; LVC aligns long/truncated pairs; CA aligns each
/// sample with its speaker centroid.
enum class Regime { kAmsm, kIrl, kLvc, kCa };

Regime ParseRegime(const std::string& name);
std::string RegimeName(Regime r);

struct LossConfig {
  Regime regime = Regime::kAmsm;
  double alpha = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double margin = 0.2;
  double scale = 30.0;

  /// Default weights of a regime: AMSM all zero, IRL/LVC alpha=1 and
  /// gamma=lambda=0.5, CA alpha=0, gamma=0.5, lambda=0.01.
  static LossConfig Defaults(Regime regime);
  /// Throws ConfigError on regime/alpha mismatch or negative weights.
  void Validate() const;
  bool uses_pairs() const {
    return regime == Regime::kIrl || regime == Regime::kLvc;
  }
};

/// Additive-margin softmax on cosine logits:
/// -log(e^{s(cos_y - m)} / (e^{s(cos_y - m)} + sum_{j != y} e^{s cos_j})).
nc::Var am_softmax_from_cosines(const nc::Var& cosines, Eigen::Index label,
                                double margin, double scale);

/// Same, from a 1xE input and N x E class weights (both normalized here).
nc::Var am_softmax(const nc::Var& input, const nc::Var& class_weights,
                   Eigen::Index label, double margin, double scale);

/// Cosine similarity of two 1xE rows.  NumericError on a zero vector.
nc::Var cos_loss(const nc::Var& a, const nc::Var& b);

/// Mean over coordinates of (a - b)^2.
nc::Var l2_loss(const nc::Var& a, const nc::Var& b);

/// Individual terms and the weighted total
/// L = L_AM(x) + alpha L_AM(x') - gamma L_cos(x, x') + lambda L_2(x, x').
struct LossTerms {
  nc::Var total;
  double am_x = 0.0;
  double am_xp = 0.0;
  double cos = 0.0;
  double l2 = 0.0;

  /// Recombines the logged terms with the config weights.
  double Recombine(const LossConfig& cfg) const {
    return am_x + cfg.alpha * am_xp - cfg.gamma * cos + cfg.lambda * l2;
  }
};

/// AMSM: no partner; only L_AM(x).
LossTerms combined_loss(const ForwardResult& x, Eigen::Index label,
                        const LossConfig& cfg);

/// IRL / LVC: both sides are network outputs sharing one parameter set.
LossTerms combined_loss(const ForwardResult& x, const ForwardResult& xp,
                        Eigen::Index label, const LossConfig& cfg);

/// CA: the partner is a constant centroid; no gradient reaches it.
LossTerms combined_loss(const ForwardResult& x, const nc::Var& centroid,
                        Eigen::Index label, const LossConfig& cfg);

}  // namespace xvalign

#endif  // XVALIGN_LOSSES_H_
