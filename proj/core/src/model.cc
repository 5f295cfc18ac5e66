// model.cc

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

#include "xvalign/model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xvalign/error.h"
#include "xvalign/rng.h"

namespace xvalign {

namespace {

nc::Matrix UniformMatrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                         double limit) {
  nc::Matrix m(rows, cols);
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

template <typename T>
void Put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  template <typename T>
  T Get() {
    T v{};
    Take(&v, sizeof v);
    return v;
  }
  void Take(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw FormatError("checkpoint: unexpected end of data");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

PoolingMode ParsePoolingMode(const std::string& name) {
  if (name == "stats") return PoolingMode::kStats;
  if (name == "attentive" || name == "attention") return PoolingMode::kAttentive;
  throw ConfigError("unknown pooling mode '" + name + "'");
}

std::string PoolingModeName(PoolingMode mode) {
  return mode == PoolingMode::kStats ? "stats" : "attentive";
}

int ContextSpan() {
  int span = 0;
  for (const auto& c : FrameContexts()) {
    span += *std::max_element(c.begin(), c.end()) -
            *std::min_element(c.begin(), c.end());
  }
  return span;
}

void ModelSpec::Validate() const {
  if (feat_dim < 1 || embedding_dim < 1) {
    throw ConfigError("model: dimensions must be positive");
  }
  for (int d : frame_dims) {
    if (d < 1) throw ConfigError("model: dimensions must be positive");
  }
  if (n_speakers < 2) throw ConfigError("model: need at least 2 speakers");
  if (pooling == PoolingMode::kAttentive &&
      (heads < 1 || frame_dims[4] % heads != 0)) {
    throw ConfigError("model: " + std::to_string(heads) +
                      " heads do not divide the pooled layer width " +
                      std::to_string(frame_dims[4]));
  }
}

NetworkParams::NetworkParams(const NetworkParams& other) : spec_(other.spec_) {
  params_.reserve(other.params_.size());
  for (const NamedParam& p : other.params_) {
    params_.push_back({p.name, nc::Var::Parameter(p.var.value())});
  }
}

NetworkParams& NetworkParams::operator=(const NetworkParams& other) {
  if (this != &other) {
    NetworkParams copy(other);
    *this = std::move(copy);
  }
  return *this;
}

NetworkParams NetworkParams::Init(const ModelSpec& spec, std::uint64_t seed) {
  spec.Validate();
  NetworkParams p;
  p.spec_ = spec;
  Rng rng(SubSeed(seed, "model-init"));
  int in_dim = spec.feat_dim;
  for (int l = 0; l < 5; ++l) {
    const int fan_in = in_dim * static_cast<int>(FrameContexts()[l].size());
    const int out = spec.frame_dims[l];
    const std::string name = "tdnn" + std::to_string(l + 1);
    p.params_.push_back(
        {name + ".weight",
         nc::Var::Parameter(
             UniformMatrix(rng, fan_in, out, std::sqrt(6.0 / fan_in)))});
    p.params_.push_back(
        {name + ".bias", nc::Var::Parameter(nc::Matrix::Zero(1, out))});
    in_dim = out;
  }
  const int d5 = spec.frame_dims[4];
  if (spec.pooling == PoolingMode::kAttentive) {
    p.params_.push_back(
        {"attention.weight",
         nc::Var::Parameter(
             UniformMatrix(rng, d5, spec.heads, std::sqrt(6.0 / d5)))});
    p.params_.push_back({"attention.bias", nc::Var::Parameter(
                                               nc::Matrix::Zero(1, spec.heads))});
  }
  const int pooled = spec.pooled_dim();
  p.params_.push_back(
      {"embedding.weight",
       nc::Var::Parameter(UniformMatrix(rng, pooled, spec.embedding_dim,
                                        std::sqrt(6.0 / pooled)))});
  p.params_.push_back(
      {"embedding.bias",
       nc::Var::Parameter(nc::Matrix::Zero(1, spec.embedding_dim))});
  p.params_.push_back(
      {"output.weight",
       nc::Var::Parameter(UniformMatrix(rng, spec.n_speakers,
                                        spec.embedding_dim,
                                        std::sqrt(6.0 / spec.embedding_dim)))});
  return p;
}

const nc::Var& NetworkParams::at(const std::string& name) const {
  for (const NamedParam& p : params_) {
    if (p.name == name) return p.var;
  }
  throw ContractError("no parameter named '" + name + "'");
}

nc::Var& NetworkParams::at(const std::string& name) {
  return const_cast<nc::Var&>(std::as_const(*this).at(name));
}

void NetworkParams::ZeroGrad() {
  for (NamedParam& p : params_) p.var.zero_grad();
}

std::size_t NetworkParams::NumValues() const {
  std::size_t n = 0;
  for (const NamedParam& p : params_) {
    n += static_cast<std::size_t>(p.var.value().size());
  }
  return n;
}

std::string NetworkParams::Serialize() const {
  std::string out;
  out.append("XVCK", 4);
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint32_t>(out, spec_.pooling == PoolingMode::kAttentive ? 1u : 0u);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(spec_.heads));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(params_.size()));
  for (const NamedParam& p : params_) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.append(p.name);
    const nc::Matrix& v = p.var.value();
    Put<std::uint64_t>(out, static_cast<std::uint64_t>(v.rows()));
    Put<std::uint64_t>(out, static_cast<std::uint64_t>(v.cols()));
    out.append(reinterpret_cast<const char*>(v.data()),
               sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  return out;
}

NetworkParams NetworkParams::Deserialize(const std::string& bytes) {
  Reader r(bytes);
  char magic[4];
  r.Take(magic, 4);
  if (std::memcmp(magic, "XVCK", 4) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = r.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(version));
  }
  NetworkParams p;
  p.spec_.pooling =
      r.Get<std::uint32_t>() == 1 ? PoolingMode::kAttentive : PoolingMode::kStats;
  p.spec_.heads = static_cast<int>(r.Get<std::uint32_t>());
  const auto n = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name(r.Get<std::uint32_t>(), '\0');
    r.Take(name.data(), name.size());
    const auto rows = r.Get<std::uint64_t>();
    const auto cols = r.Get<std::uint64_t>();
    nc::Matrix m(static_cast<Eigen::Index>(rows),
                 static_cast<Eigen::Index>(cols));
    r.Take(m.data(), sizeof(double) * rows * cols);
    p.params_.push_back({std::move(name), nc::Var::Parameter(std::move(m))});
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  // Recover the topology from tensor shapes.
  p.spec_.feat_dim = static_cast<int>(
      p.at("tdnn1.weight").rows() /
      static_cast<Eigen::Index>(FrameContexts()[0].size()));
  for (int l = 0; l < 5; ++l) {
    p.spec_.frame_dims[l] = static_cast<int>(
        p.at("tdnn" + std::to_string(l + 1) + ".weight").cols());
  }
  p.spec_.embedding_dim = static_cast<int>(p.at("embedding.weight").cols());
  p.spec_.n_speakers = static_cast<int>(p.at("output.weight").rows());
  p.spec_.Validate();
  return p;
}

void NetworkParams::Save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  const std::string bytes = Serialize();
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("write failed: " + path);
}

NetworkParams NetworkParams::Load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return Deserialize(ss.str());
}

Embedding Embedding::Normalized() const {
  const double n = values.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NumericError("embedding: cannot normalize a zero vector");
  }
  return Embedding{values / n, true};
}

nc::Var tdnn_layer(const nc::Var& input, std::span<const int> context,
                   const nc::Var& weight, const nc::Var& bias) {
  const bool identity_context = context.size() == 1 && context[0] == 0;
  const nc::Var spliced = identity_context ? input : nc::splice(input, context);
  return nc::relu(nc::add_row(nc::matmul(spliced, weight), bias));
}

nc::Var stats_pool(const nc::Var& h) {
  if (h.rows() < 2) {
    throw InputError("stats_pool: need at least 2 frames, got " +
                     std::to_string(h.rows()));
  }
  const nc::Var mean = nc::mean_rows(h);
  const nc::Var second = nc::mean_rows(nc::square(h));
  const nc::Var var =
      nc::clamp_min(nc::sub(second, nc::square(mean)), kVarianceFloor);
  const std::array<nc::Var, 2> parts = {mean, nc::sqrt(var)};
  return nc::concat_cols(parts);
}

AttentivePoolResult attentive_pool(const nc::Var& h, const nc::Var& weight,
                                   const nc::Var& bias) {
  const Eigen::Index d = h.cols();
  const Eigen::Index k = weight.cols();
  if (weight.rows() != d || bias.rows() != 1 || bias.cols() != k) {
    throw DimensionError("attentive_pool: attention parameters do not match "
                         "the hidden width");
  }
  if (k < 1 || d % k != 0) {
    throw ConfigError("attentive_pool: " + std::to_string(k) +
                      " heads do not divide width " + std::to_string(d));
  }
  if (h.rows() < 1) throw InputError("attentive_pool: empty input");
  const nc::Var scores =
      nc::sigmoid(nc::add_row(nc::matmul(h, weight), bias));
  const nc::Var alpha = nc::softmax(scores, 0);
  const nc::Var a = nc::repeat_cols(alpha, d / k);
  const nc::Var mean = nc::sum_rows(nc::mul(a, h));
  const nc::Var second = nc::sum_rows(nc::mul(a, nc::square(h)));
  const nc::Var var =
      nc::clamp_min(nc::sub(second, nc::square(mean)), kVarianceFloor);
  const std::array<nc::Var, 2> parts = {mean, nc::sqrt(var)};
  return {nc::concat_cols(parts), alpha};
}

ForwardResult forward(const nc::Matrix& frames, const NetworkParams& p) {
  const ModelSpec& spec = p.spec();
  if (frames.rows() < kMinInputFrames) {
    throw InputError("forward: " + std::to_string(frames.rows()) +
                     " frames; at least " + std::to_string(kMinInputFrames) +
                     " required");
  }
  if (frames.cols() != spec.feat_dim) {
    throw DimensionError("forward: expected " + std::to_string(spec.feat_dim) +
                         "-dim features, got " + std::to_string(frames.cols()));
  }
  nc::Var h = nc::Var::Constant(frames);
  for (int l = 0; l < 5; ++l) {
    const std::string name = "tdnn" + std::to_string(l + 1);
    h = tdnn_layer(h, FrameContexts()[l], p.at(name + ".weight"),
                   p.at(name + ".bias"));
  }
  ForwardResult r;
  nc::Var pooled;
  if (spec.pooling == PoolingMode::kAttentive) {
    AttentivePoolResult ap =
        attentive_pool(h, p.at("attention.weight"), p.at("attention.bias"));
    pooled = ap.pooled;
    r.attention = ap.alpha.value();
  } else {
    pooled = stats_pool(h);
  }
  r.embedding = nc::add_row(nc::matmul(pooled, p.at("embedding.weight")),
                            p.at("embedding.bias"));
  // Output layer: cosine between the embedding and each class row.
  r.cosines = nc::matmul(nc::l2_normalize_rows(r.embedding),
                         nc::transpose(nc::l2_normalize_rows(
                             p.at("output.weight"))));
  return r;
}

ForwardResult forward(const FeatureSequence& f, const NetworkParams& p) {
  return forward(f.frames, p);
}

Embedding ExtractEmbedding(const FeatureSequence& f, const NetworkParams& p) {
  const ForwardResult r = forward(f, p);
  return Embedding{r.embedding.value().row(0).transpose(), false};
}

}  // namespace xvalign
