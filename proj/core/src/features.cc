// features.cc

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

#include "xvalign/features.h"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include "xvalign/error.h"
#include "xvalign/rng.h"

namespace xvalign {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// FFTW planning is not thread-safe.
std::mutex& FftwMutex() {
  static std::mutex m;
  return m;
}

class MelFrontEnd {
 public:
  MelFrontEnd() {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * kFftSize));
    out_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * (kFftSize / 2 + 1)));
    {
      std::lock_guard<std::mutex> lock(FftwMutex());
      plan_ = fftw_plan_dft_r2c_1d(kFftSize, in_, out_, FFTW_ESTIMATE);
    }
    window_.resize(kFrameLength);
    for (int n = 0; n < kFrameLength; ++n) {
      window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n /
                                        (kFrameLength - 1));
    }
    BuildFilterbank();
  }
  ~MelFrontEnd() {
    std::lock_guard<std::mutex> lock(FftwMutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  MelFrontEnd(const MelFrontEnd&) = delete;
  MelFrontEnd& operator=(const MelFrontEnd&) = delete;

  void Compute(const std::vector<double>& samples, nc::Matrix* frames) {
    const std::size_t t = NumFrames(samples.size());
    frames->resize(static_cast<Eigen::Index>(t), kNumMelBins);
    const int n_bins = kFftSize / 2 + 1;
    Eigen::VectorXd mag(n_bins);
    for (std::size_t f = 0; f < t; ++f) {
      const double* src = samples.data() + f * kFrameShift;
      for (int n = 0; n < kFrameLength; ++n) in_[n] = src[n] * window_[n];
      std::fill(in_ + kFrameLength, in_ + kFftSize, 0.0);
      fftw_execute(plan_);
      for (int k = 0; k < n_bins; ++k) {
        mag(k) = std::hypot(out_[k][0], out_[k][1]);
      }
      const Eigen::VectorXd energies = filters_ * mag;
      for (int m = 0; m < kNumMelBins; ++m) {
        (*frames)(static_cast<Eigen::Index>(f), m) =
            std::log(std::max(energies(m), kLogFloor));
      }
    }
  }

 private:
  void BuildFilterbank() {
    const int n_bins = kFftSize / 2 + 1;
    const double mel_lo = HzToMel(0.0);
    const double mel_hi = HzToMel(kSampleRate / 2.0);
    std::array<double, kNumMelBins + 2> edges{};
    for (int i = 0; i < kNumMelBins + 2; ++i) {
      edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (kNumMelBins + 1));
    }
    filters_ = Eigen::MatrixXd::Zero(kNumMelBins, n_bins);
    for (int m = 0; m < kNumMelBins; ++m) {
      const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
      for (int k = 0; k < n_bins; ++k) {
        const double hz = static_cast<double>(k) * kSampleRate / kFftSize;
        double w = 0.0;
        if (hz > left && hz <= center) {
          w = (hz - left) / (center - left);
        } else if (hz > center && hz < right) {
          w = (right - hz) / (right - center);
        }
        filters_(m, k) = w;
      }
    }
  }

  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_{};
  std::vector<double> window_;
  Eigen::MatrixXd filters_;
};

MelFrontEnd& ThreadFrontEnd() {
  thread_local MelFrontEnd fe;
  return fe;
}

void PutU32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void PutU16(std::ostream& os, std::uint16_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T Get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw FormatError(path + ": unexpected end of file");
  }
  return v;
}

}  // namespace

std::size_t NumFrames(std::size_t num_samples) {
  if (num_samples < static_cast<std::size_t>(kFrameLength)) return 0;
  return (num_samples - kFrameLength) / kFrameShift + 1;
}

std::vector<double> MelCenterFrequencies() {
  const double mel_hi = HzToMel(kSampleRate / 2.0);
  std::vector<double> centers(kNumMelBins);
  for (int m = 0; m < kNumMelBins; ++m) {
    centers[m] = MelToHz(mel_hi * (m + 1) / (kNumMelBins + 1));
  }
  return centers;
}

FeatureSequence logmel(const Waveform& w) {
  if (w.sample_rate != kSampleRate) {
    throw InputError("logmel: expected " + std::to_string(kSampleRate) +
                     " Hz audio, got " + std::to_string(w.sample_rate));
  }
  if (w.samples.size() < static_cast<std::size_t>(kFrameLength)) {
    throw InputError("logmel: " + std::to_string(w.samples.size()) +
                     " samples is shorter than one analysis window");
  }
  FeatureSequence f;
  f.source = w.utterance_id;
  ThreadFrontEnd().Compute(w.samples, &f.frames);
  return f;
}

FeatureSequence sliding_mean_norm(const FeatureSequence& f) {
  const Eigen::Index t = f.frames.rows();
  const Eigen::Index win = std::min<Eigen::Index>(t, kCmnWindow);
  FeatureSequence out = f;
  if (t == 0) return out;
  // Prefix sums over frames; row i holds the sum of frames [0, i).
  nc::Matrix prefix = nc::Matrix::Zero(t + 1, f.frames.cols());
  for (Eigen::Index i = 0; i < t; ++i) {
    prefix.row(i + 1) = prefix.row(i) + f.frames.row(i);
  }
  for (Eigen::Index i = 0; i < t; ++i) {
    Eigen::Index start = i - win / 2;
    start = std::clamp<Eigen::Index>(start, 0, t - win);
    const Eigen::Index end = start + win;
    out.frames.row(i) -=
        (prefix.row(end) - prefix.row(start)) / static_cast<double>(win);
  }
  return out;
}

FeatureSequence ComputeFeatures(const Waveform& w) {
  return sliding_mean_norm(logmel(w));
}

void CorpusSpec::Validate() const {
  if (n_speakers < 2) throw ConfigError("corpus: n_speakers must be >= 2");
  if (utts_per_speaker < 1) {
    throw ConfigError("corpus: utts_per_speaker must be >= 1");
  }
  if (!(min_duration > 0.0) || max_duration < min_duration) {
    throw ConfigError("corpus: invalid duration range");
  }
  if (min_duration * kSampleRate < kFrameLength) {
    throw ConfigError("corpus: minimum duration shorter than one frame");
  }
}

namespace {

// F1-F4 of the shared vowel inventory, Hz.
constexpr std::array<std::array<double, 4>, 10> kVowels = {{
    {270, 2290, 3010, 3500},
    {390, 1990, 2550, 3600},
    {530, 1840, 2480, 3550},
    {660, 1720, 2410, 3500},
    {730, 1090, 2440, 3400},
    {570, 840, 2410, 3300},
    {440, 1020, 2240, 3300},
    {300, 870, 2240, 3350},
    {640, 1190, 2390, 3450},
    {490, 1350, 1690, 3300},
}};
constexpr double kVowelSpread = 0.12;
constexpr std::array<double, 5> kBandwidths = {60, 90, 120, 150, 200};
constexpr double kF5 = 4500.0;

}  // namespace

SyntheticVoice MakeVoice(std::uint64_t seed, int index) {
  Rng rng(SubSeed(SubSeed(seed, "voice"), static_cast<std::uint64_t>(index)));
  SyntheticVoice v;
  v.f0 = std::exp(Uniform(rng, std::log(80.0), std::log(260.0)));
  v.vtl_scale = Uniform(rng, 0.75, 1.25);
  for (double& o : v.formant_offsets) o = Uniform(rng, 0.9, 1.1);
  v.vowel_offsets.resize(kVowels.size());
  for (auto& vo : v.vowel_offsets) {
    for (double& o : vo) o = Uniform(rng, 1.0 - kVowelSpread, 1.0 + kVowelSpread);
  }
  v.bandwidth_scale = Uniform(rng, 0.8, 1.25);
  v.glottal_pole = Uniform(rng, 0.90, 0.97);
  v.breathiness = Uniform(rng, 0.01, 0.08);
  v.vibrato_hz = Uniform(rng, 4.0, 7.0);
  v.noise_level = Uniform(rng, 0.002, 0.006);
  return v;
}

std::vector<double> PinkNoise(std::size_t n, std::uint64_t seed) {
  // Paul Kellet's refined pink filter over white Gaussian noise.
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(n);
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double white = gauss(rng);
    b0 = 0.99886 * b0 + white * 0.0555179;
    b1 = 0.99332 * b1 + white * 0.0750759;
    b2 = 0.96900 * b2 + white * 0.1538520;
    b3 = 0.86650 * b3 + white * 0.3104856;
    b4 = 0.55000 * b4 + white * 0.5329522;
    b5 = -0.7616 * b5 - white * 0.0168980;
    out[i] = b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362;
    b6 = white * 0.115926;
  }
  double energy = 0.0;
  for (double x : out) energy += x * x;
  if (n > 0 && energy > 0.0) {
    const double inv_rms = 1.0 / std::sqrt(energy / static_cast<double>(n));
    for (double& x : out) x *= inv_rms;
  }
  return out;
}

namespace {

// Two-pole resonator with unit gain at DC.
struct Resonator {
  double a = 1, b = 0, c = 0, y1 = 0, y2 = 0;

  void Tune(double freq, double bw) {
    const double t = 1.0 / kSampleRate;
    c = -std::exp(-2.0 * std::numbers::pi * bw * t);
    b = 2.0 * std::exp(-std::numbers::pi * bw * t) *
        std::cos(2.0 * std::numbers::pi * freq * t);
    a = 1.0 - b - c;
  }
  double operator()(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

enum class Segment { kPause, kVowel, kFricative };

}  // namespace

std::vector<double> RenderSpeech(const SyntheticVoice& voice, double duration,
                                 std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(std::llround(duration * kSampleRate));
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double f0 = voice.f0 * Uniform(rng, 0.93, 1.07);
  const double jitter = Uniform(rng, 0.99, 1.01);
  const double vib_phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  constexpr int kRetune = 32;  // samples between coefficient updates
  // Formant glide time constant ~15 ms.
  const double glide = 1.0 - std::exp(-kRetune / (0.015 * kSampleRate));

  std::array<Resonator, 5> cascade;
  Resonator fricative;
  std::array<double, 5> freq{}, target{};
  const std::array<double, 4>& first = kVowels[0];
  for (int i = 0; i < 4; ++i) {
    freq[i] = first[i] * voice.vtl_scale * voice.formant_offsets[i] * jitter;
  }
  freq[4] = kF5 * voice.vtl_scale * jitter;
  target = freq;

  std::vector<double> speech(n, 0.0);
  double phase = 0.0, g1 = 0.0, g2 = 0.0, prev = 0.0;
  std::size_t pos = 0;
  while (pos < n) {
    const double u = Uniform(rng, 0.0, 1.0);
    const Segment kind = u < 0.15   ? Segment::kPause
                         : u < 0.25 ? Segment::kFricative
                                    : Segment::kVowel;
    double len_s = 0.0;
    switch (kind) {
      case Segment::kPause:
        len_s = Uniform(rng, 0.15, 0.5);
        break;
      case Segment::kFricative:
        len_s = Uniform(rng, 0.06, 0.15);
        fricative.Tune(Uniform(rng, 3500.0, 6000.0), 800.0);
        break;
      case Segment::kVowel: {
        len_s = Uniform(rng, 0.12, 0.35);
        const std::size_t vi = std::uniform_int_distribution<std::size_t>(
            0, kVowels.size() - 1)(rng);
        for (int i = 0; i < 4; ++i) {
          const double own =
              voice.vowel_offsets.empty() ? 1.0 : voice.vowel_offsets[vi][i];
          target[i] = kVowels[vi][i] * own * voice.vtl_scale *
                      voice.formant_offsets[i] * jitter *
                      Uniform(rng, 0.97, 1.03);
        }
        break;
      }
    }
    const double level = Uniform(rng, 0.6, 1.0);
    const double rise = Uniform(rng, -0.06, 0.06);  // intonation over the unit
    const auto len = static_cast<std::size_t>(len_s * kSampleRate);
    const std::size_t end = std::min(n, pos + len);
    const double ramp = 0.025 * kSampleRate;
    for (std::size_t s = pos; s < end; ++s) {
      const std::size_t k = s - pos;
      if (k % kRetune == 0) {
        for (int i = 0; i < 5; ++i) {
          freq[i] += glide * (target[i] - freq[i]);
          cascade[i].Tune(freq[i], kBandwidths[i] * voice.bandwidth_scale);
        }
      }
      const double env =
          level * std::min({1.0, k / ramp, (len - static_cast<double>(k)) / ramp});
      double x = 0.0;
      if (kind == Segment::kVowel) {
        const double t = static_cast<double>(s) / kSampleRate;
        const double pitch =
            f0 * (1.0 + rise * (static_cast<double>(k) / len - 0.5)) *
            (1.0 + 0.01 * std::sin(2.0 * std::numbers::pi * voice.vibrato_hz * t +
                                   vib_phase));
        phase += pitch / kSampleRate;
        double pulse = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulse = 1.0;
        }
        g1 = pulse + voice.glottal_pole * g1;
        g2 = g1 + voice.glottal_pole * g2;
        double src = g2 * (1.0 - voice.glottal_pole) * (1.0 - voice.glottal_pole);
        src += voice.breathiness * gauss(rng);
        for (Resonator& r : cascade) src = r(src);
        x = env * src;
      } else if (kind == Segment::kFricative) {
        x = 0.3 * env * fricative(gauss(rng));
      } else {
        // Keep the resonators ringing down through pauses.
        double src = 0.0;
        for (Resonator& r : cascade) src = r(src);
        x = src;
      }
      // Lip radiation: first difference.
      speech[s] = x - prev;
      prev = x;
    }
    pos = end;
    // Inter-syllable gap.
    const std::size_t gap =
        static_cast<std::size_t>(Uniform(rng, 0.02, 0.08) * kSampleRate);
    for (std::size_t s = pos; s < std::min(n, pos + gap); ++s) {
      double src = 0.0;
      for (Resonator& r : cascade) src = r(src);
      speech[s] = src - prev;
      prev = src;
    }
    pos += gap;
  }

  double peak = 0.0;
  for (double x : speech) peak = std::max(peak, std::abs(x));
  const double gain = Uniform(rng, 0.3, 0.8) / (peak > 0.0 ? peak : 1.0);
  const std::vector<double> noise =
      PinkNoise(n, SubSeed(seed, "pink-floor"));
  for (std::size_t s = 0; s < n; ++s) {
    speech[s] = std::clamp(speech[s] * gain + voice.noise_level * noise[s],
                           -1.0, 1.0);
  }
  return speech;
}

std::string SpeakerName(int speaker) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "spk%03d", speaker);
  return buf;
}

std::string UtteranceName(int speaker, int utt) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "spk%03d-u%03d", speaker, utt);
  return buf;
}

Waveform SynthUtterance(const CorpusSpec& spec, int speaker, int utt) {
  const SyntheticVoice voice = MakeVoice(spec.seed, speaker);
  const std::uint64_t s =
      SubSeed(SubSeed(SubSeed(spec.seed, "utterance"),
                      static_cast<std::uint64_t>(speaker)),
              static_cast<std::uint64_t>(utt));
  Rng rng(s);
  const double dur = Uniform(rng, spec.min_duration, spec.max_duration);
  Waveform w;
  w.samples = RenderSpeech(voice, dur, SubSeed(s, "render"));
  w.speaker_id = SpeakerName(speaker);
  w.utterance_id = UtteranceName(speaker, utt);
  return w;
}

Waveform SpeechSilenceSpeech(const CorpusSpec& spec, int speaker,
                             double speech, double silence,
                             std::uint64_t seed) {
  if (!(speech > 0.0) || !(silence > 0.0)) {
    throw InputError("SpeechSilenceSpeech: durations must be positive");
  }
  const SyntheticVoice voice = MakeVoice(spec.seed, speaker);
  const std::vector<double> a = RenderSpeech(voice, speech, SubSeed(seed, 1));
  const std::vector<double> b = RenderSpeech(voice, speech, SubSeed(seed, 2));
  const auto n = static_cast<std::size_t>(std::llround(silence * kSampleRate));
  const std::vector<double> floor = PinkNoise(n, SubSeed(seed, 3));
  Waveform w;
  w.samples = a;
  for (double x : floor) w.samples.push_back(voice.noise_level * x);
  w.samples.insert(w.samples.end(), b.begin(), b.end());
  w.speaker_id = SpeakerName(speaker);
  w.utterance_id = SpeakerName(speaker) + "-speech-silence-speech";
  return w;
}

std::vector<Waveform> synth_speaker_corpus(const CorpusSpec& spec) {
  spec.Validate();
  std::vector<Waveform> out;
  out.reserve(static_cast<std::size_t>(spec.n_speakers) *
              spec.utts_per_speaker);
  for (int s = 0; s < spec.n_speakers; ++s) {
    for (int u = 0; u < spec.utts_per_speaker; ++u) {
      out.push_back(SynthUtterance(spec, s, u));
    }
  }
  return out;
}

Waveform truncate(const Waveform& w, double dur, OffsetPolicy policy,
                  std::uint64_t seed) {
  if (!(dur > 0.0)) throw InputError("truncate: duration must be positive");
  const auto len = static_cast<std::size_t>(std::llround(dur * w.sample_rate));
  if (len > w.samples.size()) {
    throw InputError("truncate: requested " + std::to_string(dur) +
                     " s from a " + std::to_string(w.duration()) +
                     " s waveform");
  }
  std::size_t offset = 0;
  if (policy == OffsetPolicy::kRandom) {
    Rng rng(seed);
    offset = std::uniform_int_distribution<std::size_t>(
        0, w.samples.size() - len)(rng);
  }
  Waveform out;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                     w.samples.begin() +
                         static_cast<std::ptrdiff_t>(offset + len));
  out.sample_rate = w.sample_rate;
  out.speaker_id = w.speaker_id;
  out.utterance_id = w.utterance_id;
  return out;
}

void WriteWav(const std::string& path, const Waveform& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  PutU32(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  PutU32(os, 16);
  PutU16(os, 1);  // PCM
  PutU16(os, 1);  // mono
  PutU32(os, static_cast<std::uint32_t>(w.sample_rate));
  PutU32(os, static_cast<std::uint32_t>(w.sample_rate) * 2);
  PutU16(os, 2);
  PutU16(os, 16);
  os.write("data", 4);
  PutU32(os, data_bytes);
  for (double x : w.samples) {
    const auto v = static_cast<std::int16_t>(
        std::lround(std::clamp(x, -1.0, 1.0) * 32767.0));
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  if (!os) throw FormatError("write failed: " + path);
}

Waveform ReadWav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  char tag[4];
  auto read_tag = [&](const char* expect) {
    if (!is.read(tag, 4) || std::memcmp(tag, expect, 4) != 0) {
      throw FormatError(path + ": expected '" + std::string(expect, 4) + "'");
    }
  };
  read_tag("RIFF");
  Get<std::uint32_t>(is, path);
  read_tag("WAVE");
  Waveform w;
  bool have_fmt = false;
  while (is.read(tag, 4)) {
    const auto size = Get<std::uint32_t>(is, path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const auto format = Get<std::uint16_t>(is, path);
      const auto channels = Get<std::uint16_t>(is, path);
      w.sample_rate = static_cast<int>(Get<std::uint32_t>(is, path));
      Get<std::uint32_t>(is, path);
      Get<std::uint16_t>(is, path);
      const auto bits = Get<std::uint16_t>(is, path);
      if (format != 1 || channels != 1 || bits != 16) {
        throw FormatError(path + ": only 16-bit PCM mono is supported");
      }
      is.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw FormatError(path + ": data before fmt chunk");
      w.samples.resize(size / 2);
      for (double& x : w.samples) x = Get<std::int16_t>(is, path) / 32767.0;
      return w;
    } else {
      is.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw FormatError(path + ": no data chunk");
}

void WriteFeatures(const std::string& path, const FeatureSequence& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os.write("XVFT", 4);
  const auto t = static_cast<std::uint64_t>(f.frames.rows());
  const auto d = static_cast<std::uint64_t>(f.frames.cols());
  os.write(reinterpret_cast<const char*>(&t), sizeof t);
  os.write(reinterpret_cast<const char*>(&d), sizeof d);
  os.write(reinterpret_cast<const char*>(f.frames.data()),
           static_cast<std::streamsize>(sizeof(double) * t * d));
  if (!os) throw FormatError("write failed: " + path);
}

FeatureSequence ReadFeatures(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "XVFT", 4) != 0) {
    throw FormatError(path + ": bad feature magic");
  }
  const auto t = Get<std::uint64_t>(is, path);
  const auto d = Get<std::uint64_t>(is, path);
  if (d != static_cast<std::uint64_t>(kNumMelBins)) {
    throw FormatError(path + ": expected 40 feature columns");
  }
  FeatureSequence f;
  f.frames.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d));
  if (!is.read(reinterpret_cast<char*>(f.frames.data()),
               static_cast<std::streamsize>(sizeof(double) * t * d))) {
    throw FormatError(path + ": truncated feature body");
  }
  return f;
}

}  // namespace xvalign
