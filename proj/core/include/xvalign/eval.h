// xvalign/eval.h

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

#ifndef XVALIGN_EVAL_H_
#define XVALIGN_EVAL_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xvalign/model.h"

namespace xvalign {

/// Cosine similarity in [-1, 1].  NumericError if either vector is zero.
double score(const Embedding& a, const Embedding& b);

struct Trial {
  std::string enroll;
  std::string test;
  bool target = false;
};

/// Labelled trials, optionally tagged with a condition (e.g. "2s", "noisy").
struct TrialList {
  std::vector<Trial> trials;
  std::string condition;

  /// Throws InputError on a duplicate (enroll, test) pair.
  void Validate() const;
};

/// Whitespace-separated "enroll_id test_id {tgt|imp}" lines.
TrialList ReadTrials(const std::string& path);
void WriteTrials(const std::string& path, const TrialList& list);

struct ScoredTrial {
  std::string enroll;
  std::string test;
  double score = 0.0;
  bool target = false;
};

/// "enroll_id test_id score" lines (score printed with 17 significant
/// digits so it reads back exactly).
void WriteScores(const std::string& path, std::span<const ScoredTrial> scores);
/// Reads a score file and attaches labels from `trials`.
std::vector<ScoredTrial> ReadScores(const std::string& path,
                                    const TrialList& trials);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/**
   Equal error rate from the convex hull of the ROC.  Operating points are
   taken at every unique score (accept when score >= threshold) plus the
   reject-all point; the EER is where the lower hull of (P_fa, P_miss)
   crosses P_miss = P_fa, interpolating linearly between the two bracketing
   hull vertices.  Throws InputError unless both classes are present.
*/
EerResult eer(std::span<const double> target_scores,
              std::span<const double> nontarget_scores);

/// Normalized minimum detection cost over all thresholds,
/// min(c_miss p P_miss + c_fa (1-p) P_fa) / min(c_miss p, c_fa (1-p)).
double min_dcf(std::span<const double> target_scores,
               std::span<const double> nontarget_scores,
               double p_target = 0.01, double c_miss = 1.0, double c_fa = 1.0);

struct MetricsReport {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double min_dcf = 0.0;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
};

MetricsReport Evaluate(std::span<const ScoredTrial> scores,
                       double p_target = 0.01);
std::string FormatReport(const MetricsReport& r,
                         const std::string& condition = "");

/// Embeddings grouped by speaker for one condition.
using SpeakerEmbeddings = std::map<std::string, std::vector<Embedding>>;

/**
   Average within-speaker spread: for each speaker with at least two
   embeddings, the population standard deviation of the length-normalized
   embeddings per coordinate, averaged over coordinates; then averaged over
   speakers.  Returns nullopt (and logs a warning) when no speaker qualifies.
*/
std::optional<double> embedding_spread(const SpeakerEmbeddings& groups);

struct AttentionDump {
  nc::Matrix alpha;          // T' x K
  Eigen::VectorXd head_mean;  // T', average over heads
};

/// Attention weights of one utterance.  UnsupportedError for a
/// stats-pooling model.
AttentionDump dump_attention(const FeatureSequence& f, const NetworkParams& p);

/// Wide CSV: header "head_1,...,head_K,mean", then one row per frame with
/// K + 1 columns.
void WriteAttentionCsv(const std::string& path, const AttentionDump& d);
/// Long CSV: header "t,k,alpha", one row per (frame, head).
void WriteAttentionLongCsv(const std::string& path, const AttentionDump& d);

}  // namespace xvalign

#endif  // XVALIGN_EVAL_H_
