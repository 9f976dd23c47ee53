// benchmarks/bench_backend.cc

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

#include <benchmark/benchmark.h>

#include "cpcv/audio.h"
#include "cpcv/embedding.h"
#include "cpcv/gmm.h"
#include "cpcv/metrics.h"
#include "cpcv/mfcc.h"
#include "cpcv/rng.h"
#include "cpcv/synth.h"

namespace {

using namespace cpcv;

void BM_MfccPerSecondOfAudio(benchmark::State &state) {
  Waveform w = SynthesizeUtterance(0, 8, 1.0, 16000, 1);
  FeatureConfig cfg;
  for (auto _ : state) {
    FeatureMatrix f = ComputeMfcc(w, cfg);
    benchmark::DoNotOptimize(f.values.data());
  }
}
BENCHMARK(BM_MfccPerSecondOfAudio)->Unit(benchmark::kMillisecond);

void BM_AccumulateStats(benchmark::State &state) {
  int mixtures = static_cast<int>(state.range(0));
  Rng rng(2);
  Eigen::MatrixXd frames(500, 24);
  for (int t = 0; t < 500; t++)
    for (int d = 0; d < 24; d++) frames(t, d) = rng.Normal();
  DiagGmm ubm = GmmEmTrain(frames, mixtures, 2, 3);
  for (auto _ : state) {
    SuffStats st = AccumulateStats(ubm, frames);
    benchmark::DoNotOptimize(st.n.data());
  }
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_AccumulateStats)->Arg(32)->Arg(64);

void BM_PldaScoring(benchmark::State &state) {
  Rng rng(4);
  EmbeddingSet set;
  for (int s = 0; s < 10; s++)
    for (int u = 0; u < 6; u++) {
      Eigen::VectorXd v(24);
      for (int d = 0; d < 24; d++) v[d] = rng.Normal() + 2.0 * s;
      std::string id = StrCat(s + 1, "-", s + 1, "-", u);
      set.entries[id] = v;
      set.labels[id] = StrCat(s + 1);
    }
  PldaModel model = PldaFit(set, 10);
  Eigen::VectorXd e(24), t(24);
  for (int d = 0; d < 24; d++) {
    e[d] = rng.Normal();
    t[d] = rng.Normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(PldaLlr(model, e, t));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PldaScoring);

void BM_ComputeEer(benchmark::State &state) {
  int n = static_cast<int>(state.range(0));
  Rng rng(5);
  ScoreSet s;
  for (int i = 0; i < n; i++) {
    bool target = i % 4 == 0;
    s.trials.push_back({StrCat("1-1-", i), StrCat(target ? 1 : 2, "-9-", i),
                        target});
    s.scores.push_back(rng.Normal() + (target ? 1.0 : 0.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ComputeEer(s));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ComputeEer)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
