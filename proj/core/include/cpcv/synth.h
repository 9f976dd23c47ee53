// core/include/cpcv/synth.h

// Copyright 2026  cpcv authors

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

#ifndef CPCV_SYNTH_H_
#define CPCV_SYNTH_H_

#include <cstdint>
#include <string>

#include "cpcv/audio.h"

namespace cpcv {

// Synthetic corpus of filtered-noise "speakers": each source is white noise
// shaped by two source-specific resonators plus a spectral tilt, so sources
// are spectrally distinct while utterances stay stationary.
struct ToyCorpusOptions {
  int num_speakers = 8;
  int chapters_per_speaker = 2;
  int segments_per_chapter = 2;
  double utterance_seconds = 8.0;
  int sample_rate = 16000;
};

// One utterance of the given source; the waveform depends deterministically
// on (speaker, seed).
Waveform SynthesizeUtterance(int speaker, int num_speakers, double seconds,
                             int sample_rate, uint64_t seed);

// Writes root/train, root/dev (one utterance per speaker), root/eval in
// LibriSpeech-style speaker/chapter/*.wav layout with parsable ids.
void MakeToyCorpus(const std::string &root, const ToyCorpusOptions &opts,
                   uint64_t seed);

}  // namespace cpcv

#endif  // CPCV_SYNTH_H_
