// config.cc

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

#include "xvalign/config.h"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "xvalign/rng.h"

namespace xvalign {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

template <typename T>
T ParseValue(const std::string& key, const std::string& text) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(text));
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError("config: bad value '" + text + "' for " + key);
  }
}

std::vector<double> ParseList(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<double> out;
  for (const std::string& p : parts) out.push_back(ParseValue<double>(key, p));
  return out;
}

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

#define XV_NUM(key, field, type)                              \
  t[key] = [](ExperimentConfig& c, const std::string& v) {    \
    c.field = ParseValue<type>(key, v);                       \
  }

std::map<std::string, Setter> MakeSetters() {
  std::map<std::string, Setter> t;
  t["out"] = [](ExperimentConfig& c, const std::string& v) {
    c.out_dir = boost::trim_copy(v);
  };
  XV_NUM("corpus.n_speakers", corpus.n_speakers, int);
  XV_NUM("corpus.utts_per_speaker", corpus.utts_per_speaker, int);
  XV_NUM("corpus.min_duration", corpus.min_duration, double);
  XV_NUM("corpus.max_duration", corpus.max_duration, double);
  XV_NUM("corpus.probe_utts", probe_utts, int);

  XV_NUM("augment.snr_low", augment.snr_low_db, double);
  XV_NUM("augment.snr_high", augment.snr_high_db, double);
  XV_NUM("augment.rir_count", augment.rir_count, int);
  XV_NUM("augment.rir_decay_low", augment.rir_decay_low, double);
  XV_NUM("augment.rir_decay_high", augment.rir_decay_high, double);
  XV_NUM("augment.rir_tail_level", augment.rir_tail_level, double);
  XV_NUM("augment.rir_max_length", augment.rir_max_length, double);
  XV_NUM("augment.factor", augment.factor, int);
  t["augment.noise"] = [](ExperimentConfig& c, const std::string& v) {
    c.augment.noise_kind = ParseNoiseKind(boost::trim_copy(v));
  };

  t["model.frame_dims"] = [](ExperimentConfig& c, const std::string& v) {
    const std::vector<double> d = ParseList("model.frame_dims", v);
    if (d.size() != 5) {
      throw ConfigError("config: model.frame_dims needs five widths");
    }
    for (int i = 0; i < 5; ++i) c.model.frame_dims[i] = static_cast<int>(d[i]);
  };
  XV_NUM("model.embedding_dim", model.embedding_dim, int);
  XV_NUM("model.heads", model.heads, int);
  t["model.pooling"] = [](ExperimentConfig& c, const std::string& v) {
    c.model.pooling = ParsePoolingMode(boost::trim_copy(v));
  };

  t["train.regime"] = [](ExperimentConfig& c, const std::string& v) {
    c.train.loss.regime = ParseRegime(boost::trim_copy(v));
  };
  XV_NUM("train.alpha", train.loss.alpha, double);
  XV_NUM("train.gamma", train.loss.gamma, double);
  XV_NUM("train.lambda", train.loss.lambda, double);
  XV_NUM("train.margin", train.loss.margin, double);
  XV_NUM("train.scale", train.loss.scale, double);
  t["train.methodology"] = [](ExperimentConfig& c, const std::string& v) {
    c.train.methodology = ParseMethodology(boost::trim_copy(v));
  };
  XV_NUM("train.long_duration", train.long_duration, double);
  XV_NUM("train.varied_min", train.varied_min, double);
  XV_NUM("train.varied_max", train.varied_max, double);
  t["train.init_checkpoint"] = [](ExperimentConfig& c, const std::string& v) {
    const std::string p = boost::trim_copy(v);
    if (p.empty()) {
      c.train.init_checkpoint.reset();
    } else {
      c.train.init_checkpoint = p;
    }
  };
  XV_NUM("train.epochs", train.epochs, int);
  XV_NUM("train.batch_size", train.batch_size, int);
  XV_NUM("train.lr", train.lr, double);
  XV_NUM("train.momentum", train.momentum, double);
  XV_NUM("train.lr_decay", train.lr_decay, double);
  XV_NUM("train.grad_clip", train.grad_clip, double);
  t["train.ca_samples"] = [](ExperimentConfig& c, const std::string& v) {
    c.train.ca_samples = ParseSampleSource(boost::trim_copy(v));
  };
  XV_NUM("train.probe_duration", probe_duration, double);

  XV_NUM("eval.n_speakers", eval_corpus.n_speakers, int);
  XV_NUM("eval.utts_per_speaker", eval_corpus.utts_per_speaker, int);
  t["eval.trials"] = [](ExperimentConfig& c, const std::string& v) {
    const std::string p = boost::trim_copy(v);
    if (p.empty()) {
      c.trials_path.reset();
    } else {
      c.trials_path = p;
    }
  };
  t["eval.buckets"] = [](ExperimentConfig& c, const std::string& v) {
    c.buckets = ParseList("eval.buckets", v);
  };
  return t;
}

#undef XV_NUM

ExperimentConfig DefaultConfig() {
  ExperimentConfig c;
  c.eval_corpus.n_speakers = 10;
  c.eval_corpus.utts_per_speaker = 6;
  c.SetSeed(c.seed);
  return c;
}

}  // namespace

ExperimentConfig ExperimentConfig::FromString(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::map<std::string, Setter> setters = MakeSetters();
  ExperimentConfig c = DefaultConfig();
  bool explicit_weight[3] = {false, false, false};
  std::optional<std::uint64_t> seed;
  for (const auto& [name, node] : tree) {
    std::vector<std::pair<std::string, std::string>> entries;
    if (node.empty()) {
      entries.emplace_back(name, node.data());
    } else {
      for (const auto& [key, leaf] : node) {
        entries.emplace_back(name + "." + key, leaf.data());
      }
    }
    for (const auto& [key, value] : entries) {
      if (key == "seed") {
        seed = ParseValue<std::uint64_t>(key, value);
        continue;
      }
      const auto it = setters.find(key);
      if (it == setters.end()) {
        throw ConfigError("config: unknown key '" + key + "'");
      }
      it->second(c, value);
      if (key == "train.alpha") explicit_weight[0] = true;
      if (key == "train.gamma") explicit_weight[1] = true;
      if (key == "train.lambda") explicit_weight[2] = true;
    }
  }
  const LossConfig d = LossConfig::Defaults(c.train.loss.regime);
  if (!explicit_weight[0]) c.train.loss.alpha = d.alpha;
  if (!explicit_weight[1]) c.train.loss.gamma = d.gamma;
  if (!explicit_weight[2]) c.train.loss.lambda = d.lambda;
  c.SetSeed(seed.value_or(c.seed));
  return c;
}

ExperimentConfig ExperimentConfig::Load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return FromString(ss.str());
}

void ExperimentConfig::SetSeed(std::uint64_t s) {
  seed = s;
  corpus.seed = SubSeed(s, "corpus");
  eval_corpus.seed = SubSeed(s, "eval-corpus");
  augment.seed = SubSeed(s, "augment");
  train.seed = SubSeed(s, "train");
}

TrainPlan ExperimentConfig::Plan() const {
  TrainPlan p = train;
  p.augment = augment;
  p.model = model;
  return p;
}

void ExperimentConfig::SetRegime(Regime regime) {
  const LossConfig d = LossConfig::Defaults(regime);
  train.loss.regime = regime;
  train.loss.alpha = d.alpha;
  train.loss.gamma = d.gamma;
  train.loss.lambda = d.lambda;
}

void ExperimentConfig::Validate() const {
  corpus.Validate();
  eval_corpus.Validate();
  augment.Validate();
  model.Validate();
  train.loss.Validate();
  if (probe_utts < 1) throw ConfigError("config: corpus.probe_utts must be >= 1");
  if (!(probe_duration > 0.0)) {
    throw ConfigError("config: train.probe_duration must be positive");
  }
  if (train.init_checkpoint && !fs::exists(*train.init_checkpoint)) {
    throw ConfigError("config: train.init_checkpoint " +
                      *train.init_checkpoint + " does not exist");
  }
  if (trials_path && !fs::exists(*trials_path)) {
    throw ConfigError("config: eval.trials " + *trials_path +
                      " does not exist");
  }
  if (buckets.empty()) throw ConfigError("config: eval.buckets is empty");
  for (double b : buckets) {
    if (b < 0.0) throw ConfigError("config: negative duration bucket");
  }
}

std::string ExperimentConfig::Canonical() const {
  std::ostringstream os;
  os << "seed = " << seed << "\nout = " << out_dir << "\n";
  os << "\n[corpus]\nn_speakers = " << corpus.n_speakers
     << "\nutts_per_speaker = " << corpus.utts_per_speaker
     << "\nmin_duration = " << Num(corpus.min_duration)
     << "\nmax_duration = " << Num(corpus.max_duration)
     << "\nprobe_utts = " << probe_utts << "\n";
  os << "\n[augment]\nsnr_low = " << Num(augment.snr_low_db)
     << "\nsnr_high = " << Num(augment.snr_high_db)
     << "\nrir_count = " << augment.rir_count
     << "\nrir_decay_low = " << Num(augment.rir_decay_low)
     << "\nrir_decay_high = " << Num(augment.rir_decay_high)
     << "\nrir_tail_level = " << Num(augment.rir_tail_level)
     << "\nrir_max_length = " << Num(augment.rir_max_length)
     << "\nnoise = " << NoiseKindName(augment.noise_kind)
     << "\nfactor = " << augment.factor << "\n";
  os << "\n[model]\nframe_dims = ";
  for (int i = 0; i < 5; ++i) {
    os << (i ? "," : "") << model.frame_dims[i];
  }
  os << "\nembedding_dim = " << model.embedding_dim
     << "\nheads = " << model.heads
     << "\npooling = " << PoolingModeName(model.pooling) << "\n";
  os << "\n[train]\nregime = " << RegimeName(train.loss.regime)
     << "\nalpha = " << Num(train.loss.alpha)
     << "\ngamma = " << Num(train.loss.gamma)
     << "\nlambda = " << Num(train.loss.lambda)
     << "\nmargin = " << Num(train.loss.margin)
     << "\nscale = " << Num(train.loss.scale)
     << "\nmethodology = " << MethodologyName(train.methodology)
     << "\nlong_duration = " << Num(train.long_duration)
     << "\nvaried_min = " << Num(train.varied_min)
     << "\nvaried_max = " << Num(train.varied_max)
     << "\ninit_checkpoint = " << train.init_checkpoint.value_or("")
     << "\nepochs = " << train.epochs
     << "\nbatch_size = " << train.batch_size << "\nlr = " << Num(train.lr)
     << "\nmomentum = " << Num(train.momentum)
     << "\nlr_decay = " << Num(train.lr_decay)
     << "\ngrad_clip = " << Num(train.grad_clip)
     << "\nca_samples = " << SampleSourceName(train.ca_samples)
     << "\nprobe_duration = " << Num(probe_duration) << "\n";
  os << "\n[eval]\nn_speakers = " << eval_corpus.n_speakers
     << "\nutts_per_speaker = " << eval_corpus.utts_per_speaker
     << "\ntrials = " << trials_path.value_or("") << "\nbuckets = ";
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    os << (i ? "," : "") << Num(buckets[i]);
  }
  os << "\n";
  return os.str();
}

namespace {

// Section text of the canonical form, without the "[name]" line.
std::string Section(const std::string& canonical, const std::string& name) {
  const std::string head = "[" + name + "]\n";
  std::size_t b = canonical.find(head);
  if (b == std::string::npos) return {};
  b += head.size();
  const std::size_t e = canonical.find("\n[", b);
  return canonical.substr(b, e == std::string::npos ? e : e - b);
}

}  // namespace

std::string ExperimentConfig::StageHash(const std::string& stage) const {
  const std::string c = Canonical();
  // Each stage covers its own settings plus those of the stages it reads.
  std::string text = "seed = " + std::to_string(seed) + "\n" +
                     Section(c, "corpus") + Section(c, "eval");
  if (stage == "corpus") return Hex(Fnv1a(text));
  text += Section(c, "augment");
  if (stage == "augment") return Hex(Fnv1a(text));
  text += Section(c, "model") + Section(c, "train");
  if (train.init_checkpoint) {
    // Content, not the path, identifies the initial model.
    std::ifstream is(*train.init_checkpoint, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    text += "init = " + Hex(Fnv1a(ss.str())) + "\n";
  }
  if (stage == "train") return Hex(Fnv1a(text));
  if (stage == "eval") return Hex(Fnv1a(text + Section(c, "eval")));
  throw ConfigError("unknown stage '" + stage + "'");
}

std::string ExperimentConfig::StageDir(const std::string& stage) const {
  return (fs::path(out_dir) / (stage + "-" + StageHash(stage))).string();
}

void WriteManifest(const std::string& dir, const std::string& stage,
                   const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / "manifest.txt");
  if (!os) throw FormatError("cannot write manifest in " + dir);
  os << "stage = " << stage << "\n"
     << "config_hash = " << cfg.StageHash(stage) << "\n"
     << "seed = " << cfg.seed << "\n"
     << "corpus_seed = " << cfg.corpus.seed << "\n"
     << "eval_corpus_seed = " << cfg.eval_corpus.seed << "\n"
     << "augment_seed = " << cfg.augment.seed << "\n"
     << "train_seed = " << cfg.train.seed << "\n"
     << "\n# effective configuration\n"
     << cfg.Canonical();
}

}  // namespace xvalign
