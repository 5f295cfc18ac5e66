// xvalign/model.h

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

#ifndef XVALIGN_MODEL_H_
#define XVALIGN_MODEL_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xvalign/features.h"
#include "xvalign/numcore.h"

namespace xvalign {

enum class PoolingMode { kStats, kAttentive };

PoolingMode ParsePoolingMode(const std::string& name);
std::string PoolingModeName(PoolingMode mode);

/// Temporal contexts of the five frame-level layers.
inline const std::array<std::vector<int>, 5>& FrameContexts() {
  static const std::array<std::vector<int>, 5> kContexts = {{
      {-2, -1, 0, 1, 2},
      {-2, 0, 2},
      {-2, 0, 2},
      {0},
      {0},
  }};
  return kContexts;
}

/// Frames consumed by the frame-level context (12 with the default layers).
int ContextSpan();

/// Shortest accepted input, in frames.
inline constexpr int kMinInputFrames = 15;

/**
   Topology of the network.  The defaults are the full-size configuration:
   five frame-level layers of 512, 512, 512, 512 and 1500 units, 3000-dim
   pooled statistics, a 256-dim embedding layer and an N-way output.
   Smaller widths keep the same structure for desk-scale experiments.
*/
struct ModelSpec {
  int feat_dim = kNumMelBins;
  std::array<int, 5> frame_dims = {512, 512, 512, 512, 1500};
  int embedding_dim = 256;
  int n_speakers = 2;
  int heads = 100;
  PoolingMode pooling = PoolingMode::kAttentive;

  int pooled_dim() const { return 2 * frame_dims[4]; }
  /// Throws ConfigError if `heads` does not divide the last frame width.
  void Validate() const;
};

struct NamedParam {
  std::string name;
  nc::Var var;
};

/**
   All trainable tensors, by name:
     tdnn{1..5}.weight / .bias, attention.weight (D5 x K, column k = w_k),
     attention.bias (1 x K), embedding.weight / .bias, output.weight
     (N x embedding_dim, one class row per speaker, no bias).
   Copies are deep: the copy owns fresh parameter nodes.
*/
class NetworkParams {
 public:
  NetworkParams() = default;
  NetworkParams(const NetworkParams& other);
  NetworkParams& operator=(const NetworkParams& other);
  NetworkParams(NetworkParams&&) = default;
  NetworkParams& operator=(NetworkParams&&) = default;

  /// Uniform He-style init scaled by fan-in; biases zero.
  static NetworkParams Init(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::span<NamedParam> params() { return params_; }
  std::span<const NamedParam> params() const { return params_; }
  const nc::Var& at(const std::string& name) const;
  nc::Var& at(const std::string& name);

  void ZeroGrad();
  std::size_t NumValues() const;

  /**
     Versioned little-endian checkpoint:
       "XVCK" | u32 version=1 | u32 pooling (0 stats, 1 attentive)
       | u32 heads | u32 n_tensors
       | per tensor: u32 name_len, name bytes, u64 rows, u64 cols,
         rows*cols f64 row-major.
  */
  void Save(const std::string& path) const;
  static NetworkParams Load(const std::string& path);
  std::string Serialize() const;
  static NetworkParams Deserialize(const std::string& bytes);

 private:
  ModelSpec spec_;
  std::vector<NamedParam> params_;
};

/// Speaker embedding at the embedding layer.
struct Embedding {
  Eigen::VectorXd values;
  bool normalized = false;

  /// Unit-length copy; throws NumericError for a zero vector.
  Embedding Normalized() const;
};

/// ReLU(splice(input, context) * W + b).  Throws InputError when the input
/// is shorter than the context span.
nc::Var tdnn_layer(const nc::Var& input, std::span<const int> context,
                   const nc::Var& weight, const nc::Var& bias);

inline constexpr double kVarianceFloor = 1e-10;

/// [mean, std] over time of a T x D input (T >= 2), 1 x 2D.
nc::Var stats_pool(const nc::Var& h);

struct AttentivePoolResult {
  nc::Var pooled;  // 1 x 2D: [mu_1..mu_K, sigma_1..sigma_K]
  nc::Var alpha;   // T x K attention weights, columns sum to one
};

/**
   K-head sub-vector attentive statistics pooling.  Head k scores every
   frame with sigmoid(w_k . h_t + b_k), normalizes the scores over time with
   a softmax, and pools the k-th contiguous D/K slice of h with those
   weights into a weighted mean and standard deviation.
*/
AttentivePoolResult attentive_pool(const nc::Var& h, const nc::Var& weight,
                                   const nc::Var& bias);

struct ForwardResult {
  nc::Var cosines;       // 1 x N, cosine of the embedding to each class row
  nc::Var embedding;     // 1 x E, linear output of the embedding layer
  nc::Matrix attention;  // T' x K (empty for stats pooling)
};

/// Runs the whole network.  Throws InputError for fewer than
/// kMinInputFrames frames.
ForwardResult forward(const nc::Matrix& frames, const NetworkParams& p);
ForwardResult forward(const FeatureSequence& f, const NetworkParams& p);

/// Embedding of one feature sequence (not normalized).
Embedding ExtractEmbedding(const FeatureSequence& f, const NetworkParams& p);

}  // namespace xvalign

#endif  // XVALIGN_MODEL_H_
