// core/include/cpcv/audio.h

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

#ifndef CPCV_AUDIO_H_
#define CPCV_AUDIO_H_

#include <string>
#include <vector>

namespace cpcv {

// Mono waveform, samples scaled to [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;
};

// Reads a RIFF/WAVE file. Only PCM16 mono is accepted; anything else raises
// FormatError naming the offending field. Samples are scaled by 1/32768.
Waveform LoadWav(const std::string &path);

// Writes PCM16 mono; values are clipped to [-1, 1] and scaled by 32768.
void SaveWavPcm16(const std::string &path, const Waveform &w);

}  // namespace cpcv

#endif  // CPCV_AUDIO_H_
