// eval.cc

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

#include "xvalign/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "xvalign/error.h"
#include "xvalign/logging.h"

namespace xvalign {

namespace {

struct OperatingPoint {
  double threshold;  // accept when score >= threshold; +inf rejects all
  double p_miss;
  double p_fa;
};

void RequireBothClasses(std::span<const double> tgt,
                        std::span<const double> non) {
  if (tgt.empty() || non.empty()) {
    throw InputError("metrics need at least one target and one non-target "
                     "trial");
  }
}

// Operating points at every unique score, in increasing threshold order,
// followed by the reject-all point.
std::vector<OperatingPoint> Sweep(std::span<const double> tgt,
                                  std::span<const double> non) {
  std::vector<double> t(tgt.begin(), tgt.end());
  std::vector<double> n(non.begin(), non.end());
  std::sort(t.begin(), t.end());
  std::sort(n.begin(), n.end());
  std::vector<double> all;
  all.reserve(t.size() + n.size());
  std::merge(t.begin(), t.end(), n.begin(), n.end(), std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double nt = static_cast<double>(t.size());
  const double nn = static_cast<double>(n.size());
  std::vector<OperatingPoint> pts;
  pts.reserve(all.size() + 1);
  std::size_t ti = 0, ni = 0;  // counts of scores strictly below threshold
  for (double th : all) {
    while (ti < t.size() && t[ti] < th) ++ti;
    while (ni < n.size() && n[ni] < th) ++ni;
    pts.push_back({th, static_cast<double>(ti) / nt,
                   static_cast<double>(n.size() - ni) / nn});
  }
  pts.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return pts;
}

double Cross(const OperatingPoint& o, const OperatingPoint& a,
             const OperatingPoint& b) {
  return (a.p_fa - o.p_fa) * (b.p_miss - o.p_miss) -
         (a.p_miss - o.p_miss) * (b.p_fa - o.p_fa);
}

}  // namespace

double score(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) {
    throw DimensionError("score: embedding sizes differ");
  }
  const double na = a.values.norm();
  const double nb = b.values.norm();
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw NumericError("score: zero embedding");
  }
  return std::clamp(a.values.dot(b.values) / (na * nb), -1.0, 1.0);
}

void TrialList::Validate() const {
  std::set<std::pair<std::string, std::string>> seen;
  for (const Trial& t : trials) {
    if (!seen.emplace(t.enroll, t.test).second) {
      throw InputError("duplicate trial (" + t.enroll + ", " + t.test + ")");
    }
  }
}

TrialList ReadTrials(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open trial list " + path);
  TrialList list;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    Trial t;
    std::string label, extra;
    if (!(ls >> t.enroll)) continue;  // blank line
    if (!(ls >> t.test >> label) || (ls >> extra)) {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": expected 'enroll test {tgt|imp}'");
    }
    if (label == "tgt" || label == "target") {
      t.target = true;
    } else if (label == "imp" || label == "nontarget") {
      t.target = false;
    } else {
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": label must be tgt or imp");
    }
    list.trials.push_back(std::move(t));
  }
  list.Validate();
  return list;
}

void WriteTrials(const std::string& path, const TrialList& list) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  for (const Trial& t : list.trials) {
    os << t.enroll << ' ' << t.test << ' ' << (t.target ? "tgt" : "imp")
       << '\n';
  }
}

void WriteScores(const std::string& path, std::span<const ScoredTrial> scores) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << std::setprecision(17);
  for (const ScoredTrial& s : scores) {
    os << s.enroll << ' ' << s.test << ' ' << s.score << '\n';
  }
}

std::vector<ScoredTrial> ReadScores(const std::string& path,
                                    const TrialList& trials) {
  std::map<std::pair<std::string, std::string>, bool> labels;
  for (const Trial& t : trials.trials) labels[{t.enroll, t.test}] = t.target;
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open score file " + path);
  std::vector<ScoredTrial> out;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    ScoredTrial s;
    if (!(ls >> s.enroll)) continue;
    if (!(ls >> s.test >> s.score)) {
      throw FormatError(path + ": malformed line '" + line + "'");
    }
    const auto it = labels.find({s.enroll, s.test});
    if (it == labels.end()) {
      throw FormatError(path + ": trial (" + s.enroll + ", " + s.test +
                        ") not in the trial list");
    }
    s.target = it->second;
    out.push_back(std::move(s));
  }
  return out;
}

EerResult eer(std::span<const double> target_scores,
              std::span<const double> nontarget_scores) {
  RequireBothClasses(target_scores, nontarget_scores);
  std::vector<OperatingPoint> pts = Sweep(target_scores, nontarget_scores);
  // Decreasing threshold gives non-decreasing P_fa: walk the lower hull of
  // (P_fa, P_miss) with a monotone chain.
  std::reverse(pts.begin(), pts.end());
  std::vector<OperatingPoint> hull;
  for (const OperatingPoint& p : pts) {
    while (hull.size() >= 2 &&
           Cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  const double top =
      std::max(*std::max_element(target_scores.begin(), target_scores.end()),
               *std::max_element(nontarget_scores.begin(),
                                 nontarget_scores.end()));
  auto finite_threshold = [top](double th) {
    return std::isinf(th) ? top : th;
  };
  for (std::size_t j = 0; j < hull.size(); ++j) {
    const double dj = hull[j].p_miss - hull[j].p_fa;
    if (dj > 0.0) continue;
    if (dj == 0.0 || j == 0) {
      return {hull[j].p_miss, finite_threshold(hull[j].threshold)};
    }
    const OperatingPoint& a = hull[j - 1];
    const OperatingPoint& b = hull[j];
    const double da = a.p_miss - a.p_fa;
    const double t = da / (da - dj);
    const double ta = finite_threshold(a.threshold);
    const double tb = finite_threshold(b.threshold);
    return {a.p_miss + t * (b.p_miss - a.p_miss), ta + t * (tb - ta)};
  }
  // Unreachable: the accept-all point has P_miss=0 <= P_fa=1.
  return {hull.back().p_miss, finite_threshold(hull.back().threshold)};
}

double min_dcf(std::span<const double> target_scores,
               std::span<const double> nontarget_scores, double p_target,
               double c_miss, double c_fa) {
  RequireBothClasses(target_scores, nontarget_scores);
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw ConfigError("min_dcf: p_target must be in (0, 1)");
  }
  const double w_miss = c_miss * p_target;
  const double w_fa = c_fa * (1.0 - p_target);
  double best = std::numeric_limits<double>::infinity();
  for (const OperatingPoint& p : Sweep(target_scores, nontarget_scores)) {
    best = std::min(best, w_miss * p.p_miss + w_fa * p.p_fa);
  }
  return best / std::min(w_miss, w_fa);
}

MetricsReport Evaluate(std::span<const ScoredTrial> scores, double p_target) {
  std::vector<double> tgt, non;
  for (const ScoredTrial& s : scores) (s.target ? tgt : non).push_back(s.score);
  MetricsReport r;
  const EerResult e = eer(tgt, non);
  r.eer = e.eer;
  r.eer_threshold = e.threshold;
  r.min_dcf = min_dcf(tgt, non, p_target);
  r.n_target = tgt.size();
  r.n_nontarget = non.size();
  return r;
}

std::string FormatReport(const MetricsReport& r, const std::string& condition) {
  std::ostringstream os;
  os << std::setprecision(10);
  if (!condition.empty()) os << "condition " << condition << '\n';
  os << "eer " << r.eer << '\n'
     << "eer_threshold " << r.eer_threshold << '\n'
     << "min_dcf " << r.min_dcf << '\n'
     << "n_target " << r.n_target << '\n'
     << "n_nontarget " << r.n_nontarget << '\n';
  return os.str();
}

std::optional<double> embedding_spread(const SpeakerEmbeddings& groups) {
  double total = 0.0;
  std::size_t speakers = 0;
  for (const auto& [spk, embs] : groups) {
    if (embs.size() < 2) {
      LogWarning("embedding_spread: speaker " + spk +
                 " has fewer than 2 utterances; skipped");
      continue;
    }
    const Eigen::Index dim = embs.front().values.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    std::vector<Eigen::VectorXd> unit;
    unit.reserve(embs.size());
    for (const Embedding& e : embs) {
      if (e.values.size() != dim) {
        throw DimensionError("embedding_spread: mixed embedding sizes");
      }
      unit.push_back(e.Normalized().values);
      mean += unit.back();
    }
    const double n = static_cast<double>(embs.size());
    mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
    for (const Eigen::VectorXd& u : unit) var += (u - mean).cwiseAbs2();
    var /= n;
    total += var.cwiseSqrt().mean();
    ++speakers;
  }
  if (speakers == 0) {
    LogWarning("embedding_spread: no speaker with >= 2 utterances; condition "
               "skipped");
    return std::nullopt;
  }
  return total / static_cast<double>(speakers);
}

AttentionDump dump_attention(const FeatureSequence& f, const NetworkParams& p) {
  if (p.spec().pooling != PoolingMode::kAttentive) {
    throw UnsupportedError("dump_attention: model uses plain statistics "
                           "pooling and has no attention weights");
  }
  const ForwardResult r = forward(f, p);
  AttentionDump d;
  d.alpha = r.attention;
  d.head_mean = d.alpha.rowwise().mean();
  return d;
}

void WriteAttentionCsv(const std::string& path, const AttentionDump& d) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << std::setprecision(17);
  const Eigen::Index k = d.alpha.cols();
  for (Eigen::Index j = 0; j < k; ++j) os << "head_" << (j + 1) << ',';
  os << "mean\n";
  for (Eigen::Index t = 0; t < d.alpha.rows(); ++t) {
    for (Eigen::Index j = 0; j < k; ++j) os << d.alpha(t, j) << ',';
    os << d.head_mean(t) << '\n';
  }
}

void WriteAttentionLongCsv(const std::string& path, const AttentionDump& d) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << std::setprecision(17) << "t,k,alpha\n";
  for (Eigen::Index t = 0; t < d.alpha.rows(); ++t) {
    for (Eigen::Index j = 0; j < d.alpha.cols(); ++j) {
      os << t << ',' << (j + 1) << ',' << d.alpha(t, j) << '\n';
    }
  }
}

}  // namespace xvalign
