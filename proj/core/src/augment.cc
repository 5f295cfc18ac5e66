// augment.cc

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

#include "xvalign/augment.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

#include "xvalign/error.h"
#include "xvalign/rng.h"

namespace xvalign {

namespace {

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

double MeanSquare(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace

NoiseKind ParseNoiseKind(const std::string& name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "pink") return NoiseKind::kPink;
  if (name == "babble" || name == "babble-mix") return NoiseKind::kBabble;
  throw ConfigError("unknown noise kind '" + name + "'");
}

std::string NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite:
      return "white";
    case NoiseKind::kPink:
      return "pink";
    case NoiseKind::kBabble:
      return "babble-mix";
  }
  return "?";
}

void AugmentSpec::Validate() const {
  if (snr_low_db > snr_high_db) {
    throw ConfigError("augment: snr range low > high");
  }
  if (!(rir_decay_low > 0.0) || rir_decay_high < rir_decay_low) {
    throw ConfigError("augment: rir decay range must be positive and ordered");
  }
  if (rir_count < 1) throw ConfigError("augment: rir_count must be >= 1");
  if (rir_tail_level < 0.0) {
    throw ConfigError("augment: rir_tail_level must be >= 0");
  }
  if (!(rir_max_length > 0.0)) {
    throw ConfigError("augment: rir_max_length must be positive");
  }
  if (factor < 0) throw ConfigError("augment: factor must be >= 0");
}

std::vector<double> gen_rir(const AugmentSpec& spec, int index) {
  Rng rng(SubSeed(SubSeed(spec.seed, "rir"), static_cast<std::uint64_t>(index)));
  const double tau = Uniform(rng, spec.rir_decay_low, spec.rir_decay_high);
  const double tau_samples = tau * kSampleRate;
  const auto max_len =
      static_cast<std::size_t>(spec.rir_max_length * kSampleRate);
  const std::size_t len =
      std::clamp<std::size_t>(static_cast<std::size_t>(7.0 * tau_samples) + 1,
                              1, std::max<std::size_t>(max_len, 1));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> h(len);
  h[0] = 1.0;
  for (std::size_t n = 1; n < len; ++n) {
    h[n] = spec.rir_tail_level * gauss(rng) *
           std::exp(-static_cast<double>(n) / tau_samples);
  }
  double energy = 0.0;
  for (double v : h) energy += v * v;
  const double inv = 1.0 / std::sqrt(energy);
  for (double& v : h) v *= inv;
  return h;
}

std::vector<double> ConvolveSame(const std::vector<double>& x,
                                 const std::vector<double>& h) {
  const std::size_t n = x.size();
  if (n == 0 || h.empty()) return std::vector<double>(n, 0.0);
  std::size_t fft = 1;
  while (fft < n + h.size() - 1) fft <<= 1;
  const std::size_t bins = fft / 2 + 1;
  auto* a = static_cast<double*>(fftw_malloc(sizeof(double) * fft));
  auto* b = static_cast<double*>(fftw_malloc(sizeof(double) * fft));
  auto* fa = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
  auto* fb = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
  fftw_plan pa, pb, inv;
  {
    std::lock_guard<std::mutex> lock(PlanMutex());
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(fft), a, fa, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(fft), b, fb, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(fft), fa, a, FFTW_ESTIMATE);
  }
  std::fill(a, a + fft, 0.0);
  std::fill(b, b + fft, 0.0);
  std::copy(x.begin(), x.end(), a);
  std::copy(h.begin(), h.end(), b);
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re;
    fa[k][1] = im;
  }
  fftw_execute(inv);
  std::vector<double> y(a, a + n);
  for (double& v : y) v /= static_cast<double>(fft);
  {
    std::lock_guard<std::mutex> lock(PlanMutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(inv);
  }
  fftw_free(a);
  fftw_free(b);
  fftw_free(fa);
  fftw_free(fb);
  return y;
}

std::vector<double> MakeNoise(NoiseKind kind, std::size_t n,
                              std::uint64_t seed) {
  std::vector<double> out;
  switch (kind) {
    case NoiseKind::kWhite: {
      Rng rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      out.resize(n);
      for (double& v : out) v = gauss(rng);
      break;
    }
    case NoiseKind::kPink:
      out = PinkNoise(n, seed);
      break;
    case NoiseKind::kBabble: {
      // Several overlapping synthetic talkers from a voice pool disjoint
      // from any corpus seed.
      Rng rng(seed);
      const int talkers = std::uniform_int_distribution<int>(3, 5)(rng);
      out.assign(n, 0.0);
      for (int i = 0; i < talkers; ++i) {
        const SyntheticVoice v = MakeVoice(SubSeed(seed, "babble-voice"),
                                           static_cast<int>(rng() % 1000));
        const std::vector<double> s = RenderSpeech(
            v, static_cast<double>(n) / kSampleRate,
            SubSeed(seed, static_cast<std::uint64_t>(i)));
        for (std::size_t j = 0; j < n && j < s.size(); ++j) out[j] += s[j];
      }
      break;
    }
  }
  const double ms = MeanSquare(out);
  if (ms > 0.0) {
    const double inv = 1.0 / std::sqrt(ms);
    for (double& v : out) v *= inv;
  }
  return out;
}

Corruption corrupt_parts(const Waveform& w, const AugmentSpec& spec,
                         std::uint64_t seed) {
  spec.Validate();
  Rng rng(seed);
  Corruption c;
  c.rir_index = std::uniform_int_distribution<int>(0, spec.rir_count - 1)(rng);
  c.snr_db = Uniform(rng, spec.snr_low_db, spec.snr_high_db);
  c.reverberant = ConvolveSame(w.samples, gen_rir(spec, c.rir_index));
  c.noise = MakeNoise(spec.noise_kind, w.samples.size(), SubSeed(seed, "noise"));
  const double p_signal = MeanSquare(c.reverberant);
  // Unit-RMS noise scaled so that P_signal / P_noise = 10^(snr/10).
  const double noise_rms = std::sqrt(p_signal / std::pow(10.0, c.snr_db / 10.0));
  for (double& v : c.noise) v *= noise_rms;
  double peak = 0.0;
  for (std::size_t i = 0; i < c.noise.size(); ++i) {
    peak = std::max(peak, std::abs(c.reverberant[i] + c.noise[i]));
  }
  c.gain = peak > 1.0 ? 1.0 / peak : 1.0;
  return c;
}

Waveform corrupt(const Waveform& w, const AugmentSpec& spec,
                 std::uint64_t seed) {
  const Corruption c = corrupt_parts(w, spec, seed);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.speaker_id = w.speaker_id;
  out.utterance_id = w.utterance_id;
  out.samples.resize(w.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = c.gain * (c.reverberant[i] + c.noise[i]);
  }
  return out;
}

std::uint64_t CopySeed(const AugmentSpec& spec, const std::string& utterance_id,
                       int copy) {
  return SubSeed(SubSeed(SubSeed(spec.seed, "corrupt"), utterance_id),
                 static_cast<std::uint64_t>(copy));
}

double MeasureSnrDb(const std::vector<double>& signal,
                    const std::vector<double>& noise) {
  const double pn = MeanSquare(noise);
  if (pn <= 0.0) throw NumericError("MeasureSnrDb: zero noise power");
  return 10.0 * std::log10(MeanSquare(signal) / pn);
}

}  // namespace xvalign
