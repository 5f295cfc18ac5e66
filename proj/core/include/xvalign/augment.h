// xvalign/augment.h

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

#ifndef XVALIGN_AUGMENT_H_
#define XVALIGN_AUGMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "xvalign/features.h"

namespace xvalign {

enum class NoiseKind { kWhite, kPink, kBabble };

NoiseKind ParseNoiseKind(const std::string& name);
std::string NoiseKindName(NoiseKind kind);

/// Reverberation + additive-noise recipe.
struct AugmentSpec {
  double snr_low_db = 0.0;
  double snr_high_db = 18.0;
  int rir_count = 100;
  // Time constant of the exponential RIR tail, seconds.
  double rir_decay_low = 0.01;
  double rir_decay_high = 0.05;
  // Amplitude of the white-noise tail relative to the direct path.
  double rir_tail_level = 0.005;
  double rir_max_length = 0.5;  // seconds
  NoiseKind noise_kind = NoiseKind::kPink;
  int factor = 10;  // corrupted copies per clean utterance
  std::uint64_t seed = 1;

  void Validate() const;
};

/**
   Synthetic room impulse response number `index`: a unit direct path
   followed by a white-noise tail decaying as exp(-n / (tau * fs)), with tau
   drawn from the decay range, scaled to unit energy.  Deterministic under
   (spec.seed, index).
*/
std::vector<double> gen_rir(const AugmentSpec& spec, int index);

/// Linear convolution truncated to the length of `x`.
std::vector<double> ConvolveSame(const std::vector<double>& x,
                                 const std::vector<double>& h);

/// Noise of the requested kind with unit RMS.
std::vector<double> MakeNoise(NoiseKind kind, std::size_t n,
                              std::uint64_t seed);

/// The pieces of one corruption, before they are summed.
struct Corruption {
  std::vector<double> reverberant;  // clean convolved with the RIR
  std::vector<double> noise;        // already scaled to the drawn SNR
  double snr_db = 0.0;
  int rir_index = 0;
  double gain = 1.0;  // applied to the sum to keep the peak <= 1
};

Corruption corrupt_parts(const Waveform& w, const AugmentSpec& spec,
                         std::uint64_t seed);

/**
   Convolves `w` with a randomly chosen RIR and adds noise at an SNR drawn
   uniformly from the spec's range.  The SNR is measured against the power
   of the reverberant signal.  The mix is scaled down if its peak exceeds 1.
*/
Waveform corrupt(const Waveform& w, const AugmentSpec& spec,
                 std::uint64_t seed);

/// Seed of corrupted copy `copy` of the utterance named `utterance_id`.
std::uint64_t CopySeed(const AugmentSpec& spec, const std::string& utterance_id,
                       int copy);

/// 10*log10(P(signal)/P(noise)) with P the mean square.
double MeasureSnrDb(const std::vector<double>& signal,
                    const std::vector<double>& noise);

}  // namespace xvalign

#endif  // XVALIGN_AUGMENT_H_
