// xvalign/config.h

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

#ifndef XVALIGN_CONFIG_H_
#define XVALIGN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xvalign/augment.h"
#include "xvalign/features.h"
#include "xvalign/model.h"
#include "xvalign/training.h"

namespace xvalign {

/**
   Everything one experiment needs, read from an INI-style file:

     seed = 7
     out = exp
     [corpus]    n_speakers, utts_per_speaker, min_duration, max_duration,
                 probe_utts (held out per speaker for the probe trials)
     [augment]   snr_low, snr_high, rir_count, rir_decay_low, rir_decay_high,
                 rir_tail_level, rir_max_length, noise, factor
     [model]     frame_dims (five comma-separated widths), embedding_dim,
                 heads, pooling
     [train]     regime, alpha, gamma, lambda, margin, scale, methodology,
                 long_duration, varied_min, varied_max, init_checkpoint,
                 epochs, batch_size, lr, momentum, lr_decay, grad_clip,
                 ca_samples, probe_duration
     [eval]      n_speakers, utts_per_speaker, trials, buckets

   Keys absent from the file keep their defaults; unknown keys are errors.
   Loss weights not given explicitly follow the regime's defaults.
*/
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "exp";

  CorpusSpec corpus;
  int probe_utts = 4;  // last utterances of every training speaker

  AugmentSpec augment;
  ModelSpec model;
  TrainPlan train;  // augment and model are taken from the fields above
  double probe_duration = 4.0;

  // Evaluation speakers are disjoint from the training speakers.
  CorpusSpec eval_corpus;
  std::optional<std::string> trials_path;
  // Test-side durations in seconds; 0 means the full utterance.
  std::vector<double> buckets = {1.0, 2.0, 4.0, 8.0, 0.0};

  static ExperimentConfig FromString(const std::string& text);
  static ExperimentConfig Load(const std::string& path);

  /// Propagates `seed` to every stochastic component through named
  /// substreams.
  void SetSeed(std::uint64_t seed);
  /// The training plan with this config's augment and model settings.
  TrainPlan Plan() const;
  /// Switches the regime and resets the loss weights to its defaults.
  void SetRegime(Regime regime);

  /// Throws ConfigError on inconsistent values or missing referenced files.
  void Validate() const;

  /// Canonical "key = value" text of the effective configuration.
  std::string Canonical() const;
  /// Hex digest of the settings a stage depends on ("corpus", "augment",
  /// "train", "eval").
  std::string StageHash(const std::string& stage) const;
  /// Output directory of a stage: <out>/<stage>-<hash>.
  std::string StageDir(const std::string& stage) const;
};

/// Writes manifest.txt (stage, config hash, seeds and the canonical config)
/// into `dir`.
void WriteManifest(const std::string& dir, const std::string& stage,
                   const ExperimentConfig& cfg);

}  // namespace xvalign

#endif  // XVALIGN_CONFIG_H_
