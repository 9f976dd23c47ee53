// benchmarks/bench_tensor.cc

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

#include "cpcv/cpc.h"
#include "cpcv/optim.h"
#include "cpcv/rng.h"
#include "cpcv/tensor.h"

namespace {

using namespace cpcv;

Tensor RandomTensor(std::vector<int> shape, Rng &rng, bool grad = false) {
  Tensor t = Tensor::Zeros(std::move(shape), grad);
  for (auto &v : t.Values()) v = rng.Uniform(-1.0, 1.0);
  return t;
}

void BM_MatMul(benchmark::State &state) {
  int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Tensor a = RandomTensor({n, n}, rng);
  Tensor b = RandomTensor({n, n}, rng);
  for (auto _ : state) {
    Tensor c = MatMul(nullptr, a, b);
    benchmark::DoNotOptimize(c.Data());
  }
  state.SetItemsProcessed(state.iterations() * 2ll * n * n * n);
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(256)->Arg(512);

void BM_EncoderLayer2(benchmark::State &state) {
  // The costliest encoder layer at desk width: 64 channels, stride 4.
  int batch = static_cast<int>(state.range(0));
  Rng rng(2);
  Tensor x = RandomTensor({batch, 64, 4096}, rng);
  Tensor k = RandomTensor({64, 64, 8}, rng);
  Tensor bias = RandomTensor({64}, rng);
  for (auto _ : state) {
    Tensor y = Conv1d(nullptr, x, k, &bias, 4, 2);
    benchmark::DoNotOptimize(y.Data());
  }
}
BENCHMARK(BM_EncoderLayer2)->Arg(1)->Arg(8);

void BM_GruStep(benchmark::State &state) {
  int hid = static_cast<int>(state.range(0));
  Rng rng(3);
  GruLayerParams p;
  p.w_ih = RandomTensor({3 * hid, 64}, rng);
  p.w_hh = RandomTensor({3 * hid, hid}, rng);
  p.b_ih = RandomTensor({3 * hid}, rng);
  p.b_hh = RandomTensor({3 * hid}, rng);
  Tensor x = RandomTensor({64, 64}, rng);
  Tensor h = RandomTensor({64, hid}, rng);
  for (auto _ : state) {
    Tensor out = GruCell(nullptr, x, h, p);
    benchmark::DoNotOptimize(out.Data());
  }
}
BENCHMARK(BM_GruStep)->Arg(64)->Arg(256);

void BM_TrainingStep(benchmark::State &state) {
  // One full forward/backward/update on a reduced model.
  CpcConfig cfg = CpcConfig::ForVariant(CpcVariant::kCdck2);
  cfg.encoder_channels = 32;
  cfg.ar_hidden = 32;
  cfg.batch = 8;
  cfg.crop = 20480;
  CpcModel model = InitCpcModel(cfg, 4);
  std::vector<Tensor> params = model.Parameters();
  AdamState adam = MakeAdamState(params);
  Rng rng(5);
  Tensor segment = RandomTensor({cfg.batch, 1, cfg.crop}, rng);
  for (auto _ : state) {
    Tape tape;
    Tensor latents = Encode(&tape, model, segment);
    std::vector<Tensor> ctx =
        ArContext(&tape, model, latents, Direction::kForward);
    LossReport r =
        InfoNceLoss(&tape, model, latents, ctx, Direction::kForward, 20);
    ZeroGrads(params);
    tape.Backward(r.loss);
    AdamStep(params, adam, 1e-4);
    benchmark::DoNotOptimize(r.loss_value);
  }
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);

}  // namespace
