// tools/cli.cc

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

#include "cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "xvalign/augment.h"
#include "xvalign/config.h"
#include "xvalign/eval.h"
#include "xvalign/features.h"
#include "xvalign/gradsuite.h"
#include "xvalign/logging.h"
#include "xvalign/model.h"
#include "xvalign/rng.h"
#include "xvalign/training.h"

namespace xvalign::cli {

namespace {

namespace fs = std::filesystem;

/// A stage this command depends on has not been run.
class MissingStage : public Error {
 public:
  using Error::Error;
};

void Require(const fs::path& artifact, const std::string& producer) {
  if (!fs::exists(artifact)) {
    throw MissingStage("missing " + artifact.string() + "; run `xvalign " +
                       producer + "` with the same config and seed first");
  }
}

std::string BucketName(double seconds) {
  if (seconds == 0.0) return "full";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gs", seconds);
  return buf;
}

std::string Fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------- corpus

constexpr const char* kEvalPrefix = "eval-";

struct ListEntry {
  std::string utt, spk, path;
};

void WriteList(const fs::path& path, const std::vector<ListEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path.string());
  for (const ListEntry& e : entries) {
    os << e.utt << ' ' << e.spk << ' ' << e.path << '\n';
  }
}

int GenCorpus(const ExperimentConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.StageDir("corpus");
  struct Part {
    std::string name;
    const CorpusSpec* spec;
    int first, count;
    std::string prefix;
  };
  const Part parts[] = {
      {"train", &cfg.corpus, 0, cfg.corpus.utts_per_speaker, ""},
      {"probe", &cfg.corpus, cfg.corpus.utts_per_speaker, cfg.probe_utts, ""},
      {"eval", &cfg.eval_corpus, 0, cfg.eval_corpus.utts_per_speaker,
       kEvalPrefix},
  };
  std::size_t total = 0;
  for (const Part& part : parts) {
    const fs::path wav_dir = dir / "wav" / part.name;
    fs::create_directories(wav_dir);
    std::vector<ListEntry> entries;
    for (int s = 0; s < part.spec->n_speakers; ++s) {
      for (int u = part.first; u < part.first + part.count; ++u) {
        Waveform w = SynthUtterance(*part.spec, s, u);
        w.utterance_id = part.prefix + w.utterance_id;
        w.speaker_id = part.prefix + w.speaker_id;
        const std::string rel = "wav/" + part.name + "/" + w.utterance_id +
                                ".wav";
        WriteWav((dir / rel).string(), w);
        entries.push_back({w.utterance_id, w.speaker_id, rel});
      }
    }
    WriteList(dir / (part.name + ".list"), entries);
    total += entries.size();
  }
  WriteManifest(dir.string(), "corpus", cfg);
  out << "gen-corpus: " << total << " utterances in " << dir.string() << '\n';
  return 0;
}

fs::path CorpusList(const ExperimentConfig& cfg, const std::string& part) {
  const fs::path dir = cfg.StageDir("corpus");
  Require(dir / "manifest.txt", "gen-corpus");
  return dir / (part + ".list");
}

// --------------------------------------------------------------- augment

int Augment(const ExperimentConfig& cfg, std::ostream& out) {
  const WavListCorpus corpus(CorpusList(cfg, "train").string());
  const fs::path dir = cfg.StageDir("augment");
  fs::create_directories(dir / "rirs");
  fs::create_directories(dir / "examples");
  for (int r = 0; r < cfg.augment.rir_count; ++r) {
    Waveform w;
    w.samples = gen_rir(cfg.augment, r);
    char name[32];
    std::snprintf(name, sizeof name, "rir_%03d.wav", r);
    WriteWav((dir / "rirs" / name).string(), w);
  }
  // Copies are regenerated on the fly during training from these seeds;
  // the table records what each one is.
  std::ofstream table(dir / "copies.tsv");
  table << "utterance\tcopy\tseed\trir\tsnr_db\n";
  std::set<std::string> example_speakers;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Waveform w = corpus.Load(i);
    for (int c = 1; c <= cfg.augment.factor; ++c) {
      const std::uint64_t seed = CopySeed(cfg.augment, w.utterance_id, c);
      const Corruption parts = corrupt_parts(w, cfg.augment, seed);
      table << w.utterance_id << '\t' << c << '\t' << seed << '\t'
            << parts.rir_index << '\t' << Fixed(parts.snr_db, 6) << '\n';
      if (c == 1 && example_speakers.insert(w.speaker_id).second) {
        WriteWav((dir / "examples" / (w.utterance_id + "-c01.wav")).string(),
                 corrupt(w, cfg.augment, seed));
      }
    }
  }
  WriteManifest(dir.string(), "augment", cfg);
  out << "augment: " << corpus.size() * cfg.augment.factor
      << " corrupted copies described in " << (dir / "copies.tsv").string()
      << '\n';
  return 0;
}

// ----------------------------------------------------------------- train

fs::path FinalCheckpoint(const ExperimentConfig& cfg) {
  return fs::path(cfg.StageDir("train")) / "final.ckpt";
}

int Train(const ExperimentConfig& cfg, bool force, std::ostream& out) {
  const WavListCorpus corpus(CorpusList(cfg, "train").string());
  const WavListCorpus probe_corpus(CorpusList(cfg, "probe").string());
  Require(fs::path(cfg.StageDir("augment")) / "manifest.txt", "augment");
  if (cfg.train.loss.uses_pairs() && !cfg.train.init_checkpoint) {
    throw MissingStage(
        "train: regime " + RegimeName(cfg.train.loss.regime) +
        " fine-tunes a baseline; train with regime=AMSM first and set "
        "train.init_checkpoint (or --init) to its final.ckpt");
  }
  const fs::path dir = cfg.StageDir("train");
  if (!force && fs::exists(dir / "final.ckpt") &&
      fs::exists(dir / "manifest.txt")) {
    out << "train: up to date (" << (dir / "final.ckpt").string() << ")\n";
    return 0;
  }
  const ProbeSet probe = MakeProbeSet(probe_corpus, cfg.probe_duration);
  TrainOptions opts;
  opts.probe = &probe;
  opts.out_dir = dir.string();
  opts.on_epoch = [&out](const EpochMetrics& m) {
    out << "epoch " << m.epoch;
    if (m.has_losses) out << " loss " << Fixed(m.total, 6);
    if (m.probe_eer) out << " probe_eer " << Fixed(*m.probe_eer, 4);
    out << '\n';
    out.flush();
  };
  train(cfg.Plan(), corpus, opts);
  WriteManifest(dir.string(), "train", cfg);
  out << "train: wrote " << (dir / "final.ckpt").string() << '\n';
  return 0;
}

// --------------------------------------------------------------- extract

struct Condition {
  std::string name;  // "<bucket>-<clean|noisy>"
  double seconds;    // 0 = full
  bool noisy;
};

std::vector<double> SelectedBuckets(const ExperimentConfig& cfg,
                                    std::optional<double> bucket) {
  if (!bucket) return cfg.buckets;
  return {*bucket};
}

std::vector<Condition> Conditions(const std::vector<double>& buckets) {
  std::vector<Condition> out;
  for (double b : buckets) {
    out.push_back({BucketName(b) + "-clean", b, false});
    out.push_back({BucketName(b) + "-noisy", b, true});
  }
  return out;
}

// Spread conditions are always extracted alongside the buckets.
constexpr double kShortSeconds = 2.0;

void WriteEmbeddings(const fs::path& path,
                     const std::vector<std::pair<std::string, Embedding>>& e) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path.string());
  char buf[40];
  for (const auto& [id, emb] : e) {
    os << id;
    for (Eigen::Index i = 0; i < emb.values.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %.17g", emb.values[i]);
      os << buf;
    }
    os << '\n';
  }
}

std::map<std::string, Embedding> ReadEmbeddings(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  std::map<std::string, Embedding> out;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    Embedding e;
    e.values = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
    out[id] = std::move(e);
  }
  return out;
}

AugmentSpec EvalAugment(const ExperimentConfig& cfg) {
  AugmentSpec a = cfg.augment;
  a.seed = SubSeed(cfg.augment.seed, "eval");
  return a;
}

int Extract(const ExperimentConfig& cfg, std::optional<double> bucket,
            std::ostream& out) {
  const WavListCorpus corpus(CorpusList(cfg, "eval").string());
  const fs::path ckpt = FinalCheckpoint(cfg);
  Require(ckpt, "train");
  const NetworkParams params = NetworkParams::Load(ckpt.string());
  std::vector<double> buckets = SelectedBuckets(cfg, bucket);
  for (double b : {0.0, kShortSeconds}) {
    if (std::find(buckets.begin(), buckets.end(), b) == buckets.end()) {
      buckets.push_back(b);
    }
  }
  const std::vector<Condition> conds = Conditions(buckets);
  const AugmentSpec eval_aug = EvalAugment(cfg);
  std::map<std::string, std::vector<std::pair<std::string, Embedding>>> emb;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Waveform clean = corpus.Load(i);
    const Waveform noisy =
        corrupt(clean, eval_aug, CopySeed(eval_aug, clean.utterance_id, 1));
    for (const Condition& c : conds) {
      const Waveform& src = c.noisy ? noisy : clean;
      const Waveform w = c.seconds == 0.0 || c.seconds >= src.duration()
                             ? src
                             : truncate(src, c.seconds, OffsetPolicy::kStart);
      emb[c.name].emplace_back(clean.utterance_id,
                               ExtractEmbedding(ComputeFeatures(w), params));
    }
  }
  const fs::path dir = fs::path(cfg.StageDir("eval")) / "embeddings";
  fs::create_directories(dir);
  for (const auto& [name, list] : emb) {
    WriteEmbeddings(dir / (name + ".txt"), list);
  }
  WriteManifest(cfg.StageDir("eval"), "eval", cfg);
  out << "extract: " << corpus.size() << " utterances x " << conds.size()
      << " conditions in " << dir.string() << '\n';
  return 0;
}

// ----------------------------------------------------------------- score

TrialList EvalTrials(const ExperimentConfig& cfg) {
  if (cfg.trials_path) return ReadTrials(*cfg.trials_path);
  const WavListCorpus corpus(CorpusList(cfg, "eval").string());
  TrialList list;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      list.trials.push_back({corpus.ref(i).utterance_id,
                             corpus.ref(j).utterance_id,
                             corpus.ref(i).speaker_id ==
                                 corpus.ref(j).speaker_id});
    }
  }
  return list;
}

int Score(const ExperimentConfig& cfg, std::optional<double> bucket,
          std::ostream& out) {
  const fs::path dir = cfg.StageDir("eval");
  const fs::path emb_dir = dir / "embeddings";
  Require(emb_dir / "full-clean.txt", "extract");
  const TrialList trials = EvalTrials(cfg);
  trials.Validate();
  WriteTrials((dir / "trials.txt").string(), trials);
  const std::map<std::string, Embedding> enroll =
      ReadEmbeddings(emb_dir / "full-clean.txt");
  fs::create_directories(dir / "scores");
  std::size_t n = 0;
  for (const Condition& c : Conditions(SelectedBuckets(cfg, bucket))) {
    const fs::path emb_path = emb_dir / (c.name + ".txt");
    Require(emb_path, "extract");
    const std::map<std::string, Embedding> test = ReadEmbeddings(emb_path);
    std::vector<ScoredTrial> scored;
    for (const Trial& t : trials.trials) {
      const auto e = enroll.find(t.enroll);
      const auto s = test.find(t.test);
      if (e == enroll.end() || s == test.end()) {
        throw InputError("score: trial " + t.enroll + " " + t.test +
                         " names an utterance without an embedding");
      }
      scored.push_back({t.enroll, t.test, score(e->second, s->second),
                        t.target});
    }
    WriteScores((dir / "scores" / (c.name + ".txt")).string(), scored);
    n += scored.size();
  }
  out << "score: " << n << " scored trials in " << (dir / "scores").string()
      << '\n';
  return 0;
}

// ---------------------------------------------------------------- report

std::string SpreadCell(const std::optional<double>& v) {
  return v ? Fixed(*v, 4) : std::string("n/a");
}

int Report(const ExperimentConfig& cfg, std::optional<double> bucket,
           std::ostream& out) {
  const fs::path dir = cfg.StageDir("eval");
  Require(dir / "trials.txt", "score");
  const TrialList trials = ReadTrials((dir / "trials.txt").string());
  std::ostringstream rep;
  rep << "# xvalign report\n"
      << "regime " << RegimeName(cfg.train.loss.regime) << ", config "
      << cfg.StageHash("eval") << "\n\n";

  rep << "## Verification by test duration (enrollment: full clean)\n\n";
  rep << "| duration | clean EER% | clean minDCF | noisy EER% | noisy minDCF |\n"
      << "|---|---|---|---|---|\n";
  std::ostringstream detail;
  for (double b : SelectedBuckets(cfg, bucket)) {
    rep << "| " << BucketName(b);
    for (const char* kind : {"clean", "noisy"}) {
      const std::string cond = BucketName(b) + "-" + kind;
      const fs::path path = dir / "scores" / (cond + ".txt");
      Require(path, "score");
      const std::vector<ScoredTrial> scores =
          ReadScores(path.string(), trials);
      const MetricsReport m = Evaluate(scores);
      rep << " | " << Fixed(100.0 * m.eer, 2) << " | " << Fixed(m.min_dcf, 4);
      detail << FormatReport(m, cond);
    }
    rep << " |\n";
  }
  rep << "\n## Metrics per condition\n\n" << detail.str();

  rep << "\n## Average within-speaker standard deviation of embeddings\n\n";
  const fs::path emb_dir = dir / "embeddings";
  const WavListCorpus corpus(CorpusList(cfg, "eval").string());
  std::map<std::string, std::string> speaker_of;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    speaker_of[corpus.ref(i).utterance_id] = corpus.ref(i).speaker_id;
  }
  const std::string short_name = BucketName(kShortSeconds);
  const std::pair<const char*, std::string> spread_conds[] = {
      {"clean", "full-clean"},
      {"noisy", "full-noisy"},
      {"short", short_name + "-clean"},
      {"noisy&short", short_name + "-noisy"},
  };
  rep << "| clean | noisy | short | noisy&short |\n|---|---|---|---|\n|";
  for (const auto& [label, file] : spread_conds) {
    const fs::path path = emb_dir / (file + ".txt");
    Require(path, "extract");
    SpeakerEmbeddings groups;
    for (auto& [id, e] : ReadEmbeddings(path)) {
      groups[speaker_of.at(id)].push_back(e);
    }
    rep << ' ' << SpreadCell(embedding_spread(groups)) << " |";
  }
  rep << '\n';

  std::ofstream os(dir / "report.txt");
  if (!os) throw FormatError("cannot write report in " + dir.string());
  os << rep.str();
  out << rep.str();
  return 0;
}

// ------------------------------------------------------------- gradcheck

int GradCheck(const ExperimentConfig& cfg, std::ostream& out) {
  GradSuiteOptions opts;
  opts.seed = SubSeed(cfg.seed, "gradcheck");
  const std::vector<GradCase> cases = RunGradientSuite(opts);
  int failed = 0;
  for (const GradCase& c : cases) {
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %-22s %-28s rel %.3e abs %.3e n=%zu\n",
                  c.passed ? "ok" : "FAIL", c.name.c_str(), c.shape.c_str(),
                  c.report.max_rel_error, c.report.max_abs_error,
                  c.report.coordinates);
    out << line;
    if (!c.passed) ++failed;
  }
  out << "gradcheck: " << cases.size() - failed << "/" << cases.size()
      << " passed (relative error < " << opts.tolerance << ")\n";
  return failed == 0 ? 0 : 1;
}

// ------------------------------------------------------------- attn-dump

struct AttnOptions {
  std::string checkpoint;
  std::string utt;
  std::string wav;
  std::string csv;
  bool long_format = false;
  double speech = 3.0;
  double silence = 3.0;
};

int AttnDump(const ExperimentConfig& cfg, const AttnOptions& o,
             std::ostream& out) {
  const fs::path ckpt =
      o.checkpoint.empty() ? FinalCheckpoint(cfg) : fs::path(o.checkpoint);
  Require(ckpt, "train");
  const NetworkParams params = NetworkParams::Load(ckpt.string());
  Waveform w;
  bool demo = false;
  if (!o.wav.empty()) {
    w = ReadWav(o.wav);
    w.utterance_id = fs::path(o.wav).stem().string();
  } else if (!o.utt.empty()) {
    const WavListCorpus corpus(CorpusList(cfg, "eval").string());
    for (std::size_t i = 0; i < corpus.size() && w.samples.empty(); ++i) {
      if (corpus.ref(i).utterance_id == o.utt) w = corpus.Load(i);
    }
    if (w.samples.empty()) {
      throw InputError("attn-dump: no evaluation utterance named " + o.utt);
    }
  } else {
    demo = true;
    w = SpeechSilenceSpeech(cfg.eval_corpus, 0, o.speech, o.silence,
                            SubSeed(cfg.seed, "attn-demo"));
  }
  const AttentionDump d = dump_attention(ComputeFeatures(w), params);
  const fs::path csv =
      o.csv.empty()
          ? fs::path(cfg.StageDir("eval")) / "attention" / (w.utterance_id + ".csv")
          : fs::path(o.csv);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  if (o.long_format) {
    WriteAttentionLongCsv(csv.string(), d);
  } else {
    WriteAttentionCsv(csv.string(), d);
  }
  out << "attn-dump: " << d.alpha.rows() << " frames x " << d.alpha.cols()
      << " heads in " << csv.string() << '\n';
  if (demo) {
    // Pooled frame t covers input frames t .. t + span; map the thirds.
    const double shift = static_cast<double>(kFrameShift) / kSampleRate;
    const double half = ContextSpan() / 2.0;
    double sum[3] = {0, 0, 0};
    int cnt[3] = {0, 0, 0};
    for (Eigen::Index t = 0; t < d.head_mean.size(); ++t) {
      const double sec = (t + half) * shift;
      const int part = sec < o.speech ? 0 : sec < o.speech + o.silence ? 1 : 2;
      sum[part] += d.head_mean[t];
      ++cnt[part];
    }
    out << "mean attention: speech " << Fixed(sum[0] / cnt[0], 6)
        << ", silence " << Fixed(sum[1] / cnt[1], 6) << ", speech "
        << Fixed(sum[2] / cnt[2], 6) << '\n';
  }
  return 0;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"xvalign: speaker embeddings with alignment regimes"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool verbose = false;
  app.add_option("--config", config_path, "Experiment config (INI)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Global seed");
  app.add_option("--out", out_dir, "Output root directory");
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  std::string regime;
  std::optional<int> heads;
  std::optional<double> bucket;
  bool force = false;
  std::string init;
  AttnOptions attn;

  auto add_model_overrides = [&](CLI::App* sub) {
    sub->add_option("--regime", regime, "AMSM, IRL, LVC or CA");
    sub->add_option("--heads", heads, "Attention heads");
  };
  auto add_bucket = [&](CLI::App* sub) {
    sub->add_option("--duration-bucket", bucket,
                    "Only this test duration in seconds (0 = full)");
  };

  CLI::App* gen = app.add_subcommand("gen-corpus", "Render the synthetic corpus");
  CLI::App* aug = app.add_subcommand("augment", "Build the corruption recipe");
  CLI::App* trn = app.add_subcommand("train", "Train or fine-tune a model");
  add_model_overrides(trn);
  trn->add_flag("--force", force, "Retrain even if a checkpoint exists");
  trn->add_option("--init", init, "Initial checkpoint (fine-tuning)");
  CLI::App* ext = app.add_subcommand("extract", "Extract evaluation embeddings");
  CLI::App* scr = app.add_subcommand("score", "Score the trial list");
  CLI::App* rep = app.add_subcommand("report", "Duration and spread tables");
  for (CLI::App* sub : {ext, scr, rep}) {
    add_model_overrides(sub);
    add_bucket(sub);
  }
  CLI::App* grad = app.add_subcommand("gradcheck", "Finite-difference suite");
  CLI::App* att = app.add_subcommand("attn-dump", "Export attention weights");
  add_model_overrides(att);
  att->add_option("--checkpoint", attn.checkpoint, "Model checkpoint");
  att->add_option("--utt", attn.utt, "Evaluation utterance id");
  att->add_option("--wav", attn.wav, "Wave file")->check(CLI::ExistingFile);
  att->add_option("--csv", attn.csv, "Output CSV path");
  att->add_flag("--long", attn.long_format, "One row per (frame, head)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  SetLogLevel(verbose ? LogLevel::kInfo : LogLevel::kWarning);

  try {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig::FromString("")
                               : ExperimentConfig::Load(config_path);
    if (seed) cfg.SetSeed(*seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!regime.empty()) cfg.SetRegime(ParseRegime(regime));
    if (heads) cfg.model.heads = *heads;
    if (!init.empty()) cfg.train.init_checkpoint = init;
    cfg.Validate();

    if (*gen) return GenCorpus(cfg, out);
    if (*aug) return Augment(cfg, out);
    if (*trn) return Train(cfg, force, out);
    if (*ext) return Extract(cfg, bucket, out);
    if (*scr) return Score(cfg, bucket, out);
    if (*rep) return Report(cfg, bucket, out);
    if (*grad) return GradCheck(cfg, out);
    if (*att) return AttnDump(cfg, attn, out);
  } catch (const Error& e) {
    err << "xvalign: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "xvalign: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace xvalign::cli
