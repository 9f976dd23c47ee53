// core/include/cpcv/cpc.h

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

#ifndef CPCV_CPC_H_
#define CPCV_CPC_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpcv/audio.h"
#include "cpcv/features.h"
#include "cpcv/optim.h"
#include "cpcv/tensor.h"

namespace cpcv {

enum class CpcVariant { kCdck2, kCdck5, kCdck6 };

const char *CpcVariantName(CpcVariant v);
CpcVariant CpcVariantFromName(const std::string &name);

// Encoder geometry shared by all variants: five conv layers with a combined
// downsampling factor of 160 over 10 ms hops at 16 kHz.
constexpr int kEncoderLayers = 5;
constexpr int kEncoderKernels[kEncoderLayers] = {10, 8, 4, 4, 4};
constexpr int kEncoderStrides[kEncoderLayers] = {5, 4, 2, 2, 2};
constexpr int kEncoderPaddings[kEncoderLayers] = {3, 2, 1, 1, 1};
constexpr int kDownsample = 160;
constexpr int kDefaultCrop = 20480;  // 1.28 s at 16 kHz

struct CpcConfig {
  CpcVariant variant = CpcVariant::kCdck2;
  int encoder_channels = 512;  // all five layers
  int ar_hidden = 256;
  int ar_layers = 1;
  int directions = 1;  // 2 = forward + backward recurrent models
  int prediction_steps = 12;
  int batch = 64;
  int crop = kDefaultCrop;
  double learning_rate = 1e-4;
  // Random crops drawn from each utterance per epoch.
  int crops_per_utt = 1;

  // Paper-scale settings for the three named variants.
  static CpcConfig ForVariant(CpcVariant v);
  void Validate() const;
  int FeatureDim() const { return ar_hidden * directions; }
  int CropFrames() const { return crop / kDownsample; }
};

struct GruLayerParams {
  Tensor w_ih;  // [3H x in], gate order r, z, n
  Tensor w_hh;  // [3H x H]
  Tensor b_ih;  // [3H]
  Tensor b_hh;  // [3H]
};

// One gated-recurrent-unit step. With h_prev entries in [-1, 1] the output
// stays in (-1, 1): it is a convex combination of h_prev and a tanh.
Tensor GruCell(Tape *tape, const Tensor &x_t, const Tensor &h_prev,
               const GruLayerParams &params);

struct CpcModel {
  CpcConfig config;
  std::vector<Tensor> enc_weights;               // per layer [cout x cin x k]
  std::vector<Tensor> enc_biases;                // per layer [cout]
  std::vector<std::vector<GruLayerParams>> gru;  // [direction][layer]
  std::vector<std::vector<Tensor>> heads;  // [direction][step], [H x channels]

  // Flat parameter list in a fixed order (encoder, GRUs, heads).
  std::vector<Tensor> Parameters();
  int64_t CountParameterElements() const;
};

CpcModel InitCpcModel(const CpcConfig &cfg, uint64_t seed);

// Closed-form parameter total:
//   encoder sum(cin*cout*k + cout)
//   + GRU per layer 3*(hid*in + hid*hid + 2*hid) per direction
//   + heads directions*k*hid*channels
int64_t ParameterCount(const CpcConfig &cfg);

// Raw segment [batch x 1 x len] -> latents [batch x channels x len/160].
// len must be a positive multiple of 160.
Tensor Encode(Tape *tape, CpcModel &model, const Tensor &segment);

enum class Direction { kForward, kBackward };

// Contexts per frame, forward time order. Forward contexts at frame t depend
// only on latents <= t; backward contexts are computed on the reversed
// sequence and re-reversed, so they depend only on latents >= t.
std::vector<Tensor> ArContext(Tape *tape, CpcModel &model,
                              const Tensor &latents, Direction dir);

struct LossReport {
  Tensor loss;          // scalar on the tape (undefined in eval-only paths)
  double loss_value = 0.0;
  double accuracy = 0.0;  // argmax-over-batch fraction at the last step only

  // ln(batch) - loss, the mutual-information lower bound estimate.
  double Bound(int batch) const;
};

// Batch-softmax loss over prediction steps 1..k from anchor frame t:
// scores[i][j] = latents[j, t+tau] . (W_tau contexts[i, t]). Needs batch >= 2
// (the other rows provide the negatives) and t + k <= frames - 1.
LossReport InfoNceLoss(Tape *tape, CpcModel &model, const Tensor &latents,
                       const std::vector<Tensor> &contexts, Direction dir,
                       int anchor_t);

// Mean of the two direction losses (the 1/2-weighted joint objective).
Tensor JointLoss(Tape *tape, const Tensor &fwd_loss, const Tensor &bwd_loss);

// Full-utterance features: one row per latent frame (10 ms rate); dims
// ar_hidden * directions (backward contexts re-aligned and concatenated).
// The waveform is truncated to a multiple of 160 samples.
FeatureMatrix ExtractContextFeatures(CpcModel &model, const Waveform &w);

// ---- training ---------------------------------------------------------------

struct CpcEpochReport {
  int epoch = 0;
  double dev_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct CpcTrainResult {
  CpcModel model;  // parameters of the best dev-loss epoch
  std::vector<CpcEpochReport> epochs;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
};

// Seeded training: per epoch the utterance order is reshuffled and
// crops_per_utt random crops are drawn from every usable utterance; batches
// of cfg.batch crops take one optimizer step each (ragged tails are
// dropped). Utterances shorter than the crop are skipped with a warning;
// if none remain a DataError is raised. The optional log stream receives
// one "epoch,loss,accuracy" CSV line per epoch.
CpcTrainResult CpcTrain(const std::vector<Waveform> &train_utts,
                        const std::vector<Waveform> &dev_utts,
                        const CpcConfig &cfg, int epochs, uint64_t seed,
                        std::ostream *log = nullptr);

// Checkpoints: parameters in the shared container plus a text sidecar
// (<path>.meta) holding the variant tag, epoch, and dev loss.
struct CpcCheckpointMeta {
  std::string variant;
  int epoch = 0;
  double dev_loss = 0.0;
};

void SaveCpcCheckpoint(const std::string &path, CpcModel &model,
                       const CpcCheckpointMeta &meta);
CpcModel LoadCpcCheckpoint(const std::string &path,
                           CpcCheckpointMeta *meta = nullptr);

}  // namespace cpcv

#endif  // CPCV_CPC_H_
