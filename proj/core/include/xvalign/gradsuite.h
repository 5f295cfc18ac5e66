// xvalign/gradsuite.h

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

#ifndef XVALIGN_GRADSUITE_H_
#define XVALIGN_GRADSUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "xvalign/numcore.h"

namespace xvalign {

struct GradCase {
  std::string name;   // component, e.g. "tdnn3" or "combined_loss_ca"
  std::string shape;  // human-readable shape of this instance
  nc::GradCheckReport report;
  bool passed = false;
};

struct GradSuiteOptions {
  std::uint64_t seed = 1;
  int shapes_per_component = 5;
  double eps = 1e-6;
  double tolerance = 1e-4;  // on the relative error
};

/**
   Central-difference checks of every differentiable component on random
   shapes: the five frame layers, stats and attentive pooling, the
   embedding and cosine output layers, AM-softmax, the cosine and L2 terms,
   and the combined loss of every regime through a small full network.
*/
std::vector<GradCase> RunGradientSuite(const GradSuiteOptions& opts = {});

}  // namespace xvalign

#endif  // XVALIGN_GRADSUITE_H_
