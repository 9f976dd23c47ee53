// core/src/synth.cc

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

#include "cpcv/synth.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cpcv/common.h"
#include "cpcv/rng.h"

namespace fs = std::filesystem;

namespace cpcv {

Waveform SynthesizeUtterance(int speaker, int num_speakers, double seconds,
                             int sample_rate, uint64_t seed) {
  if (speaker < 0 || speaker >= num_speakers)
    throw ContractError("SynthesizeUtterance: speaker index out of range");
  int64_t n = static_cast<int64_t>(seconds * sample_rate);
  if (n < 2) throw ContractError("SynthesizeUtterance: duration too short");

  // Source-specific resonances and spectral tilt.
  double f1 = 350.0 + 320.0 * speaker;
  double f2 = 950.0 + 410.0 * speaker;
  double tilt = -0.6 + 1.2 * speaker / std::max(num_speakers - 1, 1);
  const double r = 0.97;
  double a1_1 = 2.0 * r * std::cos(2.0 * M_PI * f1 / sample_rate);
  double a2_1 = -r * r;
  double a1_2 = 2.0 * r * std::cos(2.0 * M_PI * f2 / sample_rate);
  double a2_2 = -r * r;

  Rng rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<size_t>(n));
  double y1p = 0, y1pp = 0, y2p = 0, y2pp = 0, prev = 0;
  double peak = 0.0;
  for (int64_t i = 0; i < n; i++) {
    double x = rng.Normal();
    double y1 = x + a1_1 * y1p + a2_1 * y1pp;
    y1pp = y1p;
    y1p = y1;
    double y2 = y1 + a1_2 * y2p + a2_2 * y2pp;
    y2pp = y2p;
    y2p = y2;
    double out = y2 + tilt * prev;
    prev = y2;
    w.samples[static_cast<size_t>(i)] = out;
    peak = std::max(peak, std::abs(out));
  }
  if (peak > 0.0)
    for (auto &v : w.samples) v *= 0.5 / peak;
  return w;
}

namespace {

void WriteSplit(const std::string &root, const char *split,
                const ToyCorpusOptions &opts, int chapters, int segments,
                int chapter_base, uint64_t seed) {
  for (int s = 0; s < opts.num_speakers; s++) {
    std::string speaker = StrCat(101 + s);
    for (int c = 0; c < chapters; c++) {
      std::string chapter = StrCat(chapter_base + 10 * s + c);
      fs::path dir = fs::path(root) / split / speaker / chapter;
      fs::create_directories(dir);
      for (int g = 0; g < segments; g++) {
        char seg[8];
        std::snprintf(seg, sizeof(seg), "%04d", g);
        std::string utt_id = StrCat(speaker, "-", chapter, "-", seg);
        uint64_t utt_seed = MixSeed(MixSeed(seed, chapter_base + 10 * s + c),
                                    static_cast<uint64_t>(g));
        Waveform w = SynthesizeUtterance(s, opts.num_speakers,
                                         opts.utterance_seconds,
                                         opts.sample_rate, utt_seed);
        SaveWavPcm16((dir / (utt_id + ".wav")).string(), w);
      }
    }
  }
}

}  // namespace

void MakeToyCorpus(const std::string &root, const ToyCorpusOptions &opts,
                   uint64_t seed) {
  if (opts.num_speakers < 2)
    throw ConfigError("MakeToyCorpus: need at least two speakers");
  WriteSplit(root, "train", opts, opts.chapters_per_speaker,
             opts.segments_per_chapter, 2000, MixSeed(seed, 1));
  WriteSplit(root, "dev", opts, 1, 1, 5000, MixSeed(seed, 2));
  WriteSplit(root, "eval", opts, opts.chapters_per_speaker,
             opts.segments_per_chapter, 7000, MixSeed(seed, 3));
}

}  // namespace cpcv
