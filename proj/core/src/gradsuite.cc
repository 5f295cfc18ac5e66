// gradsuite.cc

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

#include "xvalign/gradsuite.h"

#include <functional>

#include "xvalign/losses.h"
#include "xvalign/model.h"
#include "xvalign/rng.h"

namespace xvalign {

namespace {

using nc::Matrix;
using nc::Var;

Matrix Random(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = Uniform(rng, -scale, scale);
  }
  return m;
}

int RandInt(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Scalar probe of a matrix-valued output: sum(out .* R) with fixed random R,
// so that every output coordinate contributes with its own weight.
Var Probe(const Var& out, const Matrix& r) {
  return nc::sum(nc::mul(out, Var::Constant(r)));
}

std::string Dims(std::initializer_list<Eigen::Index> d) {
  std::string s;
  for (Eigen::Index v : d) {
    if (!s.empty()) s += "x";
    s += std::to_string(v);
  }
  return s;
}

class Suite {
 public:
  explicit Suite(const GradSuiteOptions& o) : opts_(o), rng_(o.seed) {}

  void Check(const std::string& name, const std::string& shape,
             const std::function<Var()>& loss, std::vector<Var> params) {
    GradCase c;
    c.name = name;
    c.shape = shape;
    c.report = nc::check_gradients(loss, params, opts_.eps, 2000, rng_());
    c.passed = c.report.max_rel_error < opts_.tolerance;
    cases_.push_back(std::move(c));
  }

  void FrameLayers() {
    for (int l = 0; l < 5; ++l) {
      const std::vector<int>& ctx = FrameContexts()[l];
      for (int s = 0; s < opts_.shapes_per_component; ++s) {
        const int t = RandInt(rng_, 6, 14), in = RandInt(rng_, 2, 7),
                  out = RandInt(rng_, 2, 7);
        const Eigen::Index fan = in * static_cast<Eigen::Index>(ctx.size());
        Var x = Var::Parameter(Random(rng_, t, in));
        Var w = Var::Parameter(Random(rng_, fan, out));
        Var b = Var::Parameter(Random(rng_, 1, out, 0.3));
        const Eigen::Index t_out =
            t - (ctx.back() - ctx.front());
        const Matrix r = Random(rng_, t_out, out);
        Check("tdnn" + std::to_string(l + 1), Dims({t, in, out}),
              [=] { return Probe(tdnn_layer(x, ctx, w, b), r); }, {x, w, b});
      }
    }
  }

  void Pooling() {
    for (int s = 0; s < opts_.shapes_per_component; ++s) {
      const int t = RandInt(rng_, 2, 12), d = RandInt(rng_, 1, 9);
      Var h = Var::Parameter(Random(rng_, t, d));
      const Matrix r = Random(rng_, 1, 2 * d);
      Check("stats_pool", Dims({t, d}),
            [=] { return Probe(stats_pool(h), r); }, {h});
    }
    for (int s = 0; s < opts_.shapes_per_component; ++s) {
      const int k = RandInt(rng_, 1, 4), width = RandInt(rng_, 1, 3),
                t = RandInt(rng_, 2, 12);
      const int d = k * width;
      Var h = Var::Parameter(Random(rng_, t, d));
      Var w = Var::Parameter(Random(rng_, d, k));
      Var b = Var::Parameter(Random(rng_, 1, k, 0.5));
      const Matrix r = Random(rng_, 1, 2 * d);
      Check("attentive_pool", Dims({t, d, k}),
            [=] { return Probe(attentive_pool(h, w, b).pooled, r); },
            {h, w, b});
    }
  }

  void SegmentLayers() {
    for (int s = 0; s < opts_.shapes_per_component; ++s) {
      const int p = RandInt(rng_, 2, 10), e = RandInt(rng_, 2, 6);
      Var x = Var::Parameter(Random(rng_, 1, p));
      Var w = Var::Parameter(Random(rng_, p, e));
      Var b = Var::Parameter(Random(rng_, 1, e));
      const Matrix r = Random(rng_, 1, e);
      Check("embedding_layer", Dims({p, e}),
            [=] { return Probe(nc::add_row(nc::matmul(x, w), b), r); },
            {x, w, b});
    }
    for (int s = 0; s < opts_.shapes_per_component; ++s) {
      const int e = RandInt(rng_, 2, 6), n = RandInt(rng_, 2, 6);
      Var x = Var::Parameter(Random(rng_, 1, e));
      Var w = Var::Parameter(Random(rng_, n, e));
      const Matrix r = Random(rng_, 1, n);
      Check("cosine_output", Dims({e, n}),
            [=] {
              return Probe(nc::matmul(nc::l2_normalize_rows(x),
                                      nc::transpose(nc::l2_normalize_rows(w))),
                           r);
            },
            {x, w});
    }
  }

  void Losses() {
    for (int s = 0; s < opts_.shapes_per_component; ++s) {
      const int e = RandInt(rng_, 2, 8), n = RandInt(rng_, 2, 8);
      const Eigen::Index label = RandInt(rng_, 0, n - 1);
      Var x = Var::Parameter(Random(rng_, 1, e));
      Var w = Var::Parameter(Random(rng_, n, e));
      Check("am_softmax", Dims({e, n}),
            [=] { return am_softmax(x, w, label, 0.2, 30.0); }, {x, w});
    }
    for (int s = 0; s < opts_.shapes_per_component; ++s) {
      const int e = RandInt(rng_, 2, 8);
      Var a = Var::Parameter(Random(rng_, 1, e));
      Var b = Var::Parameter(Random(rng_, 1, e));
      Check("cos_loss", Dims({e}), [=] { return cos_loss(a, b); }, {a, b});
      Check("l2_loss", Dims({e}), [=] { return l2_loss(a, b); }, {a, b});
    }
  }

  // The combined objective of each regime through a small full network.
  void Combined() {
    const Regime regimes[] = {Regime::kAmsm, Regime::kIrl, Regime::kLvc,
                              Regime::kCa};
    for (Regime regime : regimes) {
      for (int s = 0; s < opts_.shapes_per_component; ++s) {
        ModelSpec spec;
        spec.feat_dim = RandInt(rng_, 3, 5);
        const int k = RandInt(rng_, 1, 3);
        for (int l = 0; l < 4; ++l) spec.frame_dims[l] = RandInt(rng_, 3, 5);
        spec.frame_dims[4] = k * RandInt(rng_, 1, 2);
        spec.heads = k;
        spec.embedding_dim = RandInt(rng_, 2, 4);
        spec.n_speakers = RandInt(rng_, 2, 4);
        spec.pooling = s % 2 == 0 ? PoolingMode::kAttentive : PoolingMode::kStats;
        auto params =
            std::make_shared<NetworkParams>(NetworkParams::Init(spec, rng_()));
        for (NamedParam& np : params->params()) {
          // Nonzero biases so that every ReLU is exercised off the origin.
          if (np.name.find("bias") != std::string::npos) {
            np.var.mutable_value() = Random(rng_, 1, np.var.cols(), 0.2);
          }
        }
        const Matrix x = Random(rng_, RandInt(rng_, 15, 20), spec.feat_dim);
        const Matrix xp = Random(rng_, RandInt(rng_, 15, 20), spec.feat_dim);
        Matrix centroid = Random(rng_, 1, spec.embedding_dim);
        centroid /= centroid.norm();
        const Eigen::Index label = RandInt(rng_, 0, spec.n_speakers - 1);
        const LossConfig cfg = LossConfig::Defaults(regime);
        std::function<Var()> loss = [=] {
          const ForwardResult fx = forward(x, *params);
          if (cfg.uses_pairs()) {
            return combined_loss(fx, forward(xp, *params), label, cfg).total;
          }
          if (regime == Regime::kCa) {
            return combined_loss(fx, Var::Constant(centroid), label, cfg)
                .total;
          }
          return combined_loss(fx, label, cfg).total;
        };
        std::vector<Var> vars;
        for (const NamedParam& np : params->params()) vars.push_back(np.var);
        Check("combined_loss_" + RegimeName(regime),
              PoolingModeName(spec.pooling) + " K=" + std::to_string(k) +
                  " T=" + std::to_string(x.rows()),
              loss, vars);
      }
    }
  }

  std::vector<GradCase> Take() { return std::move(cases_); }

 private:
  GradSuiteOptions opts_;
  Rng rng_;
  std::vector<GradCase> cases_;
};

}  // namespace

std::vector<GradCase> RunGradientSuite(const GradSuiteOptions& opts) {
  Suite s(opts);
  s.FrameLayers();
  s.Pooling();
  s.SegmentLayers();
  s.Losses();
  s.Combined();
  return s.Take();
}

}  // namespace xvalign
