// xvalign/features.h

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

#ifndef XVALIGN_FEATURES_H_
#define XVALIGN_FEATURES_H_

#include <cstddef>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xvalign/numcore.h"

namespace xvalign {

inline constexpr int kSampleRate = 16000;
inline constexpr int kFrameLength = 400;  // 25 ms
inline constexpr int kFrameShift = 160;   // 10 ms
inline constexpr int kFftSize = 512;
inline constexpr int kNumMelBins = 40;
inline constexpr double kLogFloor = 1e-10;
inline constexpr int kCmnWindow = 300;  // 3 s at 10 ms

/// Mono audio at kSampleRate with samples in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  std::string speaker_id;
  std::string utterance_id;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// T x 40 log-mel frames at a 10 ms shift.
struct FeatureSequence {
  nc::Matrix frames;
  double frame_shift = 0.010;
  std::string source;

  Eigen::Index num_frames() const { return frames.rows(); }
};

/// Number of analysis frames for `num_samples` (0 if shorter than a window).
std::size_t NumFrames(std::size_t num_samples);

/// Center frequencies (Hz) of the 40 triangular mel filters.
std::vector<double> MelCenterFrequencies();

/**
   Log mel-filterbank front end: 25 ms Hann windows every 10 ms, 512-point
   FFT magnitude, 40 triangular filters spanning 0-8000 Hz on the HTK mel
   scale, natural log with a 1e-10 floor.  Throws InputError when the
   waveform is shorter than one window or not at 16 kHz.
*/
FeatureSequence logmel(const Waveform& w);

/**
   Subtracts from each frame the mean of a 300-frame window centred on it.
   Near the edges the window is shifted inward so it keeps min(T, 300)
   frames; sequences shorter than the window are normalized by their global
   mean.
*/
FeatureSequence sliding_mean_norm(const FeatureSequence& f);

/// logmel followed by sliding_mean_norm.
FeatureSequence ComputeFeatures(const Waveform& w);

/// Parameters of the synthetic corpus generator.
struct CorpusSpec {
  int n_speakers = 20;
  int utts_per_speaker = 20;
  double min_duration = 8.5;
  double max_duration = 10.0;
  std::uint64_t seed = 1;

  void Validate() const;
};

/**
   Source-filter voice of one synthetic speaker.  All speakers share one
   vowel inventory; they differ in pitch, vocal-tract length, small
   per-formant offsets, formant bandwidths, glottal tilt and breathiness.
*/
struct SyntheticVoice {
  double f0 = 140.0;         // mean pitch, Hz
  double vtl_scale = 1.0;    // multiplies every formant frequency
  std::array<double, 4> formant_offsets = {1.0, 1.0, 1.0, 1.0};
  // Speaker-specific realization of each inventory vowel (F1-F4 factors).
  std::vector<std::array<double, 4>> vowel_offsets;
  double bandwidth_scale = 1.0;
  double glottal_pole = 0.95;  // two-pole low-pass on the pulse train
  double breathiness = 0.03;   // aspiration noise relative to voicing
  double vibrato_hz = 5.0;
  double noise_level = 0.005;  // pink-noise floor amplitude
};

/// Deterministic voice of speaker `index` under `seed`.
SyntheticVoice MakeVoice(std::uint64_t seed, int index);

/**
   Renders one utterance of `voice`: a glottal pulse train through a cascade
   of five formant resonators, with vowel targets drawn per syllable from a
   shared inventory, fricative noise bursts, pauses, per-utterance pitch and
   formant jitter, and a pink-noise floor throughout.  Deterministic under
   `seed`.
*/
std::vector<double> RenderSpeech(const SyntheticVoice& voice, double duration,
                                 std::uint64_t seed);

/// Pink noise (1/f) with unit RMS.
std::vector<double> PinkNoise(std::size_t n, std::uint64_t seed);

/// Speaker and utterance identifiers of the corpus generator.
std::string SpeakerName(int speaker);
std::string UtteranceName(int speaker, int utt);

/// One utterance of the synthetic corpus (without rendering the others).
Waveform SynthUtterance(const CorpusSpec& spec, int speaker, int utt);

/**
   Speech, then `silence` seconds of the speaker's noise floor alone, then
   speech again; each speech part lasts `speech` seconds.  Used to inspect
   how attention treats non-speech frames.
*/
Waveform SpeechSilenceSpeech(const CorpusSpec& spec, int speaker,
                             double speech, double silence,
                             std::uint64_t seed);

/**
   Generates n_speakers x utts_per_speaker waveforms.  Each speaker is a
   fixed random set of 4-6 formant-like sinusoids plus pink noise; utterances
   differ in duration, phase and syllable structure.
*/
std::vector<Waveform> synth_speaker_corpus(const CorpusSpec& spec);

enum class OffsetPolicy { kStart, kRandom };

/// Contiguous `dur`-second segment.  Throws InputError if dur exceeds the
/// waveform's duration or is not positive.
Waveform truncate(const Waveform& w, double dur, OffsetPolicy policy,
                  std::uint64_t seed = 0);

// 16-bit PCM mono RIFF files.
void WriteWav(const std::string& path, const Waveform& w);
Waveform ReadWav(const std::string& path);

// Flat feature container: "XVFT", uint64 T, uint64 40, T*40 doubles
// (little-endian, row-major).
void WriteFeatures(const std::string& path, const FeatureSequence& f);
FeatureSequence ReadFeatures(const std::string& path);

}  // namespace xvalign

#endif  // XVALIGN_FEATURES_H_
