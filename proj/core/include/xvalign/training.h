// xvalign/training.h

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

#ifndef XVALIGN_TRAINING_H_
#define XVALIGN_TRAINING_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xvalign/augment.h"
#include "xvalign/error.h"
#include "xvalign/eval.h"
#include "xvalign/features.h"
#include "xvalign/losses.h"
#include "xvalign/model.h"

namespace xvalign {

struct UtteranceRef {
  std::string speaker_id;
  std::string utterance_id;
};

/// Read-only collection of clean utterances, loaded on demand.
class Corpus {
 public:
  virtual ~Corpus() = default;
  virtual std::size_t size() const = 0;
  virtual const UtteranceRef& ref(std::size_t i) const = 0;
  virtual Waveform Load(std::size_t i) const = 0;

  /// Sorted unique speaker ids; a speaker's label is its index here.
  std::vector<std::string> Speakers() const;
};

/// Utterances [first_utt, first_utt + count) of every speaker of a
/// synthetic corpus, rendered when loaded.
class SyntheticCorpus : public Corpus {
 public:
  explicit SyntheticCorpus(const CorpusSpec& spec, int first_utt = 0,
                           int count = -1);
  std::size_t size() const override { return refs_.size(); }
  const UtteranceRef& ref(std::size_t i) const override { return refs_[i]; }
  Waveform Load(std::size_t i) const override;
  const CorpusSpec& spec() const { return spec_; }

 private:
  CorpusSpec spec_;
  std::vector<UtteranceRef> refs_;
  std::vector<std::pair<int, int>> index_;  // (speaker, utt)
};

/// Corpus described by a list file of "utterance_id speaker_id wav_path"
/// lines (relative paths resolve against the list's directory).
class WavListCorpus : public Corpus {
 public:
  explicit WavListCorpus(const std::string& list_path);
  std::size_t size() const override { return refs_.size(); }
  const UtteranceRef& ref(std::size_t i) const override { return refs_[i]; }
  Waveform Load(std::size_t i) const override;

 private:
  std::vector<UtteranceRef> refs_;
  std::vector<std::string> paths_;
};

/// Speaker id -> class label.
std::map<std::string, int> LabelMap(const std::vector<std::string>& speakers);

enum class Methodology { kLong, kVaried };
Methodology ParseMethodology(const std::string& name);
std::string MethodologyName(Methodology m);

/// Which copies feed CA's classification term.
enum class SampleSource { kCorrupted, kClean, kAny };
SampleSource ParseSampleSource(const std::string& name);
std::string SampleSourceName(SampleSource s);

struct TrainPlan {
  LossConfig loss;
  Methodology methodology = Methodology::kLong;
  double long_duration = 8.0;
  double varied_min = 0.5;
  double varied_max = 8.5;
  std::optional<std::string> init_checkpoint;
  int epochs = 30;
  int batch_size = 16;
  double lr = 0.01;
  double momentum = 0.9;
  double lr_decay = 0.95;  // per epoch
  // Batch gradients with a larger global L2 norm are rescaled to it
  // (0 disables).
  double grad_clip = 1.0;
  std::uint64_t seed = 1;
  SampleSource ca_samples = SampleSource::kCorrupted;
  AugmentSpec augment;
  ModelSpec model;  // topology of a fresh model (no init checkpoint)

  /// Throws ConfigError; IRL and LVC need an initial model.
  void Validate(bool have_init) const;
};

/// Per-speaker centroids of length-normalized clean embeddings.
struct CentroidTable {
  nc::Matrix centroids;  // N x E, unit rows
  int epoch = 0;         // epoch after which they were computed
};

struct TrainingPair {
  Waveform x;
  std::optional<Waveform> xp;      // IRL / LVC partner
  std::optional<nc::Matrix> centroid;  // CA partner (1 x E)
  int label = 0;
  int copy = 0;  // augmentation copy used for x (0 = clean)
};

/**
   Builds the training input(s) for one utterance under `plan`:
     AMSM: one segment of a random copy (clean or corrupted);
     IRL:  (clean segment, corrupted version of the same segment);
     LVC:  (long segment, random-length truncation of the same utterance,
            capped at its duration);
     CA:   (segment, centroid of the speaker from `centroids`).
   Returns nullopt, with a warning, when the utterance is shorter than the
   methodology needs.
*/
std::optional<TrainingPair> make_pair(const Waveform& utt, int label,
                                      const TrainPlan& plan,
                                      std::uint64_t seed,
                                      const CentroidTable* centroids = nullptr);

/**
   Centroid of each speaker's clean full-length embeddings: the mean of the
   length-normalized embeddings, renormalized to unit length.  Throws
   InputError if a speaker has no utterance and NumericError if a mean is
   (near) zero.
*/
CentroidTable refresh_centroids(const NetworkParams& params,
                                const Corpus& clean_full_length,
                                const std::map<std::string, int>& labels,
                                int epoch);

/// Fixed evaluation trials used to track EER during training.
struct ProbeSet {
  std::vector<std::string> ids;
  std::vector<FeatureSequence> features;
  TrialList trials;
};

/// Clean `duration`-second segments (from the start) of every utterance,
/// with all pairs as trials.  Utterances shorter than `duration` are used
/// whole.
ProbeSet MakeProbeSet(const Corpus& corpus, double duration);

double ProbeEer(const NetworkParams& params, const ProbeSet& probe);

struct EpochMetrics {
  int epoch = 0;
  double am_x = 0.0;
  double am_xp = 0.0;
  double cos = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  std::optional<double> probe_eer;
  int centroid_epoch = -1;  // stamp of the centroids used (CA only)
  int samples = 0;
  int skipped = 0;
  bool has_losses = true;  // false for the epoch-0 (initial) row
};

class TrainingDiverged : public NumericError {
 public:
  using NumericError::NumericError;
};

struct TrainOptions {
  const NetworkParams* init = nullptr;  // overrides plan.init_checkpoint
  const ProbeSet* probe = nullptr;
  /// Clean full-length utterances for CA centroids (default: the corpus).
  const Corpus* centroid_corpus = nullptr;
  /// Checkpoints and metrics.csv are written here when non-empty.
  std::string out_dir;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochMetrics> log;
  std::optional<CentroidTable> centroids;
};

/**
   Mini-batch SGD with momentum on the regime's loss.  Each epoch visits
   every corpus utterance once in a seeded order.  Every step evaluates both
   sides of a pair with the same parameter snapshot.  In CA the centroids
   used during epoch n are those computed after epoch n-1 (epoch 0: from the
   initial model).  Throws TrainingDiverged on a non-finite loss.
*/
TrainResult train(const TrainPlan& plan, const Corpus& corpus,
                  const TrainOptions& options = {});

/// "epoch,L_AM_x,L_AM_x',L_cos,L_2,total,probe_EER" rows.
std::string FormatMetricsCsv(const std::vector<EpochMetrics>& log);

}  // namespace xvalign

#endif  // XVALIGN_TRAINING_H_
