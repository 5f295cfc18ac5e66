// training.cc

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

#include "xvalign/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "xvalign/logging.h"
#include "xvalign/rng.h"

namespace xvalign {

namespace fs = std::filesystem;

std::vector<std::string> Corpus::Speakers() const {
  std::set<std::string> s;
  for (std::size_t i = 0; i < size(); ++i) s.insert(ref(i).speaker_id);
  return {s.begin(), s.end()};
}

SyntheticCorpus::SyntheticCorpus(const CorpusSpec& spec, int first_utt,
                                 int count)
    : spec_(spec) {
  spec_.Validate();
  if (count < 0) count = spec.utts_per_speaker;
  for (int s = 0; s < spec.n_speakers; ++s) {
    for (int u = first_utt; u < first_utt + count; ++u) {
      refs_.push_back({SpeakerName(s), UtteranceName(s, u)});
      index_.emplace_back(s, u);
    }
  }
}

Waveform SyntheticCorpus::Load(std::size_t i) const {
  return SynthUtterance(spec_, index_[i].first, index_[i].second);
}

WavListCorpus::WavListCorpus(const std::string& list_path) {
  std::ifstream is(list_path);
  if (!is) throw FormatError("cannot open corpus list " + list_path);
  const fs::path base = fs::path(list_path).parent_path();
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    UtteranceRef r;
    std::string path;
    if (!(ls >> r.utterance_id)) continue;
    if (!(ls >> r.speaker_id >> path)) {
      throw FormatError(list_path + ": expected 'utt speaker path'");
    }
    fs::path p(path);
    if (p.is_relative()) p = base / p;
    refs_.push_back(std::move(r));
    paths_.push_back(p.string());
  }
}

Waveform WavListCorpus::Load(std::size_t i) const {
  Waveform w = ReadWav(paths_[i]);
  w.speaker_id = refs_[i].speaker_id;
  w.utterance_id = refs_[i].utterance_id;
  return w;
}

std::map<std::string, int> LabelMap(const std::vector<std::string>& speakers) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    m[speakers[i]] = static_cast<int>(i);
  }
  return m;
}

Methodology ParseMethodology(const std::string& name) {
  if (name == "long") return Methodology::kLong;
  if (name == "varied") return Methodology::kVaried;
  throw ConfigError("unknown methodology '" + name + "'");
}

std::string MethodologyName(Methodology m) {
  return m == Methodology::kLong ? "long" : "varied";
}

SampleSource ParseSampleSource(const std::string& name) {
  if (name == "corrupted") return SampleSource::kCorrupted;
  if (name == "clean") return SampleSource::kClean;
  if (name == "any") return SampleSource::kAny;
  throw ConfigError("unknown sample source '" + name + "'");
}

std::string SampleSourceName(SampleSource s) {
  switch (s) {
    case SampleSource::kCorrupted:
      return "corrupted";
    case SampleSource::kClean:
      return "clean";
    case SampleSource::kAny:
      return "any";
  }
  return "?";
}

void TrainPlan::Validate(bool have_init) const {
  loss.Validate();
  if (loss.uses_pairs() && !have_init) {
    throw ConfigError("train: " + RegimeName(loss.regime) +
                      " starts from a baseline; set init_checkpoint");
  }
  if (!(long_duration > 0.0) || !(varied_min > 0.0) ||
      varied_max < varied_min) {
    throw ConfigError("train: durations must be positive and ordered");
  }
  if (epochs < 0 || batch_size < 1) {
    throw ConfigError("train: epochs >= 0 and batch_size >= 1 required");
  }
  if (!(lr > 0.0) || momentum < 0.0 || momentum >= 1.0 || !(lr_decay > 0.0) ||
      grad_clip < 0.0) {
    throw ConfigError("train: invalid optimizer settings");
  }
  augment.Validate();
}

namespace {

Waveform Segment(const Waveform& w, double dur, Rng& rng) {
  return truncate(w, std::min(dur, w.duration()), OffsetPolicy::kRandom, rng());
}

int DrawCopy(SampleSource source, int factor, Rng& rng) {
  switch (source) {
    case SampleSource::kClean:
      return 0;
    case SampleSource::kCorrupted:
      if (factor == 0) return 0;
      return std::uniform_int_distribution<int>(1, factor)(rng);
    case SampleSource::kAny:
      return std::uniform_int_distribution<int>(0, factor)(rng);
  }
  return 0;
}

Waveform ApplyCopy(const Waveform& w, const TrainPlan& plan,
                   const std::string& utterance_id, int copy) {
  if (copy == 0) return w;
  return corrupt(w, plan.augment, CopySeed(plan.augment, utterance_id, copy));
}

}  // namespace

std::optional<TrainingPair> make_pair(const Waveform& utt, int label,
                                      const TrainPlan& plan,
                                      std::uint64_t seed,
                                      const CentroidTable* centroids) {
  const Regime regime = plan.loss.regime;
  const bool long_x = plan.methodology == Methodology::kLong ||
                      regime == Regime::kLvc;
  const double min_needed = long_x ? plan.long_duration : plan.varied_min;
  if (utt.duration() + 1e-9 < min_needed) {
    LogWarning("make_pair: " + utt.utterance_id + " (" +
               std::to_string(utt.duration()) + " s) is shorter than " +
               std::to_string(min_needed) + " s; skipped");
    return std::nullopt;
  }
  Rng rng(seed);
  TrainingPair pair;
  pair.label = label;
  auto draw_duration = [&]() {
    if (long_x) return plan.long_duration;
    return Uniform(rng, plan.varied_min,
                   std::min(plan.varied_max, utt.duration()));
  };

  switch (regime) {
    case Regime::kAmsm:
    case Regime::kCa: {
      const SampleSource src =
          regime == Regime::kAmsm ? SampleSource::kAny : plan.ca_samples;
      pair.copy = DrawCopy(src, plan.augment.factor, rng);
      const Waveform seg = Segment(utt, draw_duration(), rng);
      pair.x = ApplyCopy(seg, plan, utt.utterance_id, pair.copy);
      if (regime == Regime::kCa) {
        if (centroids == nullptr) {
          throw ContractError("make_pair: CA needs a centroid table");
        }
        if (label < 0 || label >= centroids->centroids.rows()) {
          throw InputError("make_pair: no centroid for label " +
                           std::to_string(label));
        }
        pair.centroid = centroids->centroids.row(label);
      }
      break;
    }
    case Regime::kIrl: {
      const Waveform seg = Segment(utt, draw_duration(), rng);
      pair.copy = 0;
      const int partner = DrawCopy(SampleSource::kCorrupted,
                                   plan.augment.factor, rng);
      pair.x = seg;
      pair.xp = ApplyCopy(seg, plan, utt.utterance_id, partner);
      break;
    }
    case Regime::kLvc: {
      pair.copy = DrawCopy(SampleSource::kAny, plan.augment.factor, rng);
      const Waveform seg = Segment(utt, plan.long_duration, rng);
      const double short_dur =
          std::min(Uniform(rng, plan.varied_min, plan.varied_max),
                   utt.duration());
      const Waveform trunc = Segment(utt, short_dur, rng);
      pair.x = ApplyCopy(seg, plan, utt.utterance_id, pair.copy);
      pair.xp = ApplyCopy(trunc, plan, utt.utterance_id, pair.copy);
      break;
    }
  }
  return pair;
}

CentroidTable refresh_centroids(const NetworkParams& params,
                                const Corpus& clean_full_length,
                                const std::map<std::string, int>& labels,
                                int epoch) {
  const int n = static_cast<int>(labels.size());
  const int dim = params.spec().embedding_dim;
  nc::Matrix sums = nc::Matrix::Zero(n, dim);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < clean_full_length.size(); ++i) {
    const auto it = labels.find(clean_full_length.ref(i).speaker_id);
    if (it == labels.end()) continue;
    const Embedding e =
        ExtractEmbedding(ComputeFeatures(clean_full_length.Load(i)), params)
            .Normalized();
    sums.row(it->second) += e.values.transpose();
    ++counts[static_cast<std::size_t>(it->second)];
  }
  CentroidTable table;
  table.epoch = epoch;
  table.centroids.resize(n, dim);
  for (const auto& [spk, label] : labels) {
    const int c = counts[static_cast<std::size_t>(label)];
    if (c == 0) {
      throw InputError("refresh_centroids: speaker " + spk +
                       " has no clean full-length utterance");
    }
    const Eigen::RowVectorXd mean = sums.row(label) / c;
    const double norm = mean.norm();
    if (!(norm > 1e-8)) {
      throw NumericError("refresh_centroids: centroid of speaker " + spk +
                         " is degenerate (near-zero mean)");
    }
    table.centroids.row(label) = mean / norm;
  }
  return table;
}

ProbeSet MakeProbeSet(const Corpus& corpus, double duration) {
  ProbeSet probe;
  std::vector<std::string> speakers;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Waveform w = corpus.Load(i);
    if (w.duration() > duration) {
      w = truncate(w, duration, OffsetPolicy::kStart);
    }
    probe.ids.push_back(corpus.ref(i).utterance_id);
    speakers.push_back(corpus.ref(i).speaker_id);
    probe.features.push_back(ComputeFeatures(w));
  }
  for (std::size_t i = 0; i < probe.ids.size(); ++i) {
    for (std::size_t j = i + 1; j < probe.ids.size(); ++j) {
      probe.trials.trials.push_back(
          {probe.ids[i], probe.ids[j], speakers[i] == speakers[j]});
    }
  }
  probe.trials.condition = "probe";
  return probe;
}

double ProbeEer(const NetworkParams& params, const ProbeSet& probe) {
  std::map<std::string, Embedding> emb;
  for (std::size_t i = 0; i < probe.ids.size(); ++i) {
    emb[probe.ids[i]] = ExtractEmbedding(probe.features[i], params);
  }
  std::vector<double> tgt, non;
  for (const Trial& t : probe.trials.trials) {
    const double s = score(emb.at(t.enroll), emb.at(t.test));
    (t.target ? tgt : non).push_back(s);
  }
  return eer(tgt, non).eer;
}

namespace {

class SgdMomentum {
 public:
  SgdMomentum(const NetworkParams& p, double momentum, double clip)
      : momentum_(momentum), clip_(clip) {
    for (const NamedParam& np : p.params()) {
      velocity_.push_back(
          nc::Matrix::Zero(np.var.value().rows(), np.var.value().cols()));
    }
  }

  // g = clip(grad / batch); v <- mu v + g; w <- w - lr v.
  void Step(NetworkParams& p, double lr, int batch) {
    double sq = 0.0;
    for (const NamedParam& np : p.params()) {
      if (np.var.has_grad()) sq += np.var.grad().squaredNorm();
    }
    const double norm = std::sqrt(sq) / batch;
    double g_scale = 1.0 / batch;
    if (clip_ > 0.0 && norm > clip_) g_scale *= clip_ / norm;
    std::size_t i = 0;
    for (NamedParam& np : p.params()) {
      nc::Matrix& v = velocity_[i++];
      if (np.var.has_grad()) {
        v = momentum_ * v + g_scale * np.var.grad();
      } else {
        v *= momentum_;
      }
      np.var.mutable_value() -= lr * v;
      if (!np.var.value().allFinite()) {
        throw TrainingDiverged("parameter " + np.name +
                               " became non-finite after an update");
      }
    }
  }

 private:
  double momentum_;
  double clip_;
  std::vector<nc::Matrix> velocity_;
};

std::string EpochPath(const std::string& dir, int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03d.ckpt", epoch);
  return (fs::path(dir) / buf).string();
}

}  // namespace

TrainResult train(const TrainPlan& plan, const Corpus& corpus,
                  const TrainOptions& options) {
  NetworkParams params;
  bool have_init = false;
  if (options.init != nullptr) {
    params = *options.init;
    have_init = true;
  } else if (plan.init_checkpoint) {
    params = NetworkParams::Load(*plan.init_checkpoint);
    have_init = true;
  }
  plan.Validate(have_init);

  const std::vector<std::string> speakers = corpus.Speakers();
  const std::map<std::string, int> labels = LabelMap(speakers);
  if (!have_init) {
    ModelSpec spec = plan.model;
    spec.n_speakers = static_cast<int>(speakers.size());
    params = NetworkParams::Init(spec, SubSeed(plan.seed, "init"));
  } else if (params.spec().n_speakers != static_cast<int>(speakers.size())) {
    throw ConfigError("train: initial model has " +
                      std::to_string(params.spec().n_speakers) +
                      " output classes but the corpus has " +
                      std::to_string(speakers.size()) + " speakers");
  }
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

  const Corpus& centroid_corpus =
      options.centroid_corpus != nullptr ? *options.centroid_corpus : corpus;
  const bool ca = plan.loss.regime == Regime::kCa;

  TrainResult result;
  std::optional<CentroidTable> centroids;
  if (ca) centroids = refresh_centroids(params, centroid_corpus, labels, 0);

  EpochMetrics initial;
  initial.epoch = 0;
  initial.has_losses = false;
  if (options.probe != nullptr) {
    initial.probe_eer = ProbeEer(params, *options.probe);
  }
  result.log.push_back(initial);
  if (options.on_epoch) options.on_epoch(initial);

  SgdMomentum opt(params, plan.momentum, plan.grad_clip);
  std::vector<std::size_t> order(corpus.size());
  for (int epoch = 1; epoch <= plan.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(SubSeed(SubSeed(plan.seed, "epoch-order"),
                          static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), order_rng);
    const double lr = plan.lr * std::pow(plan.lr_decay, epoch - 1);

    EpochMetrics m;
    m.epoch = epoch;
    if (ca) m.centroid_epoch = centroids->epoch;
    // The table is read-only within the epoch.
    const CentroidTable* table = ca ? &*centroids : nullptr;

    int in_batch = 0;
    params.ZeroGrad();
    for (std::size_t step = 0; step < order.size(); ++step) {
      const std::size_t idx = order[step];
      const Waveform utt = corpus.Load(idx);
      const int label = labels.at(corpus.ref(idx).speaker_id);
      const std::uint64_t sample_seed =
          SubSeed(SubSeed(SubSeed(plan.seed, "sample"),
                          static_cast<std::uint64_t>(epoch)),
                  Fnv1a(corpus.ref(idx).utterance_id));
      const std::optional<TrainingPair> pair =
          make_pair(utt, label, plan, sample_seed, table);
      if (!pair) {
        ++m.skipped;
      } else {
        try {
          const ForwardResult fx = forward(ComputeFeatures(pair->x), params);
          LossTerms terms;
          if (plan.loss.uses_pairs()) {
            const ForwardResult fxp =
                forward(ComputeFeatures(*pair->xp), params);
            terms = combined_loss(fx, fxp, label, plan.loss);
          } else if (ca) {
            terms = combined_loss(fx, nc::Var::Constant(*pair->centroid),
                                  label, plan.loss);
          } else {
            terms = combined_loss(fx, label, plan.loss);
          }
          nc::backward(terms.total);
          m.am_x += terms.am_x;
          m.am_xp += terms.am_xp;
          m.cos += terms.cos;
          m.l2 += terms.l2;
          m.total += terms.total.item();
        } catch (const NumericError& e) {
          throw TrainingDiverged("training diverged at epoch " +
                                 std::to_string(epoch) + ", step " +
                                 std::to_string(step) + " (" +
                                 corpus.ref(idx).utterance_id + "): " +
                                 e.what());
        }
        ++m.samples;
        ++in_batch;
      }
      const bool last = step + 1 == order.size();
      if (in_batch > 0 && (in_batch == plan.batch_size || last)) {
        opt.Step(params, lr, in_batch);
        params.ZeroGrad();
        in_batch = 0;
      }
    }
    if (m.samples > 0) {
      const double n = m.samples;
      m.am_x /= n;
      m.am_xp /= n;
      m.cos /= n;
      m.l2 /= n;
      m.total /= n;
    }
    if (!std::isfinite(m.total)) {
      throw TrainingDiverged("non-finite mean loss in epoch " +
                             std::to_string(epoch));
    }
    if (options.probe != nullptr) {
      m.probe_eer = ProbeEer(params, *options.probe);
    }
    if (ca) {
      centroids = refresh_centroids(params, centroid_corpus, labels, epoch);
    }
    if (!options.out_dir.empty()) {
      params.Save(EpochPath(options.out_dir, epoch));
    }
    LogInfo("epoch " + std::to_string(epoch) + " loss " +
            std::to_string(m.total) +
            (m.probe_eer ? " probe EER " + std::to_string(*m.probe_eer)
                         : std::string()));
    result.log.push_back(m);
    if (options.on_epoch) options.on_epoch(m);
  }

  if (!options.out_dir.empty()) {
    params.Save((fs::path(options.out_dir) / "final.ckpt").string());
    std::ofstream os(fs::path(options.out_dir) / "metrics.csv");
    os << FormatMetricsCsv(result.log);
  }
  result.params = std::move(params);
  result.centroids = std::move(centroids);
  return result;
}

std::string FormatMetricsCsv(const std::vector<EpochMetrics>& log) {
  std::ostringstream os;
  os << "epoch,L_AM_x,L_AM_x',L_cos,L_2,total,probe_EER\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  for (const EpochMetrics& m : log) {
    os << m.epoch;
    if (m.has_losses) {
      os << ',' << num(m.am_x) << ',' << num(m.am_xp) << ',' << num(m.cos)
         << ',' << num(m.l2) << ',' << num(m.total);
    } else {
      os << ",,,,,";
    }
    os << ',' << (m.probe_eer ? num(*m.probe_eer) : std::string()) << '\n';
  }
  return os.str();
}

}  // namespace xvalign
