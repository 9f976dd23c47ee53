// core/src/cpc.cc

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

#include "cpcv/cpc.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

#include "cpcv/container.h"

namespace cpcv {

const char *CpcVariantName(CpcVariant v) {
  switch (v) {
    case CpcVariant::kCdck2: return "CDCK2";
    case CpcVariant::kCdck5: return "CDCK5";
    case CpcVariant::kCdck6: return "CDCK6";
  }
  return "unknown";
}

CpcVariant CpcVariantFromName(const std::string &name) {
  if (name == "CDCK2") return CpcVariant::kCdck2;
  if (name == "CDCK5") return CpcVariant::kCdck5;
  if (name == "CDCK6") return CpcVariant::kCdck6;
  throw ConfigError(StrCat("unknown CPC variant: '", name, "'"));
}

CpcConfig CpcConfig::ForVariant(CpcVariant v) {
  CpcConfig cfg;
  cfg.variant = v;
  switch (v) {
    case CpcVariant::kCdck2:
      cfg.ar_hidden = 256;
      cfg.ar_layers = 1;
      cfg.directions = 1;
      break;
    case CpcVariant::kCdck5:
      cfg.ar_hidden = 40;
      cfg.ar_layers = 2;
      cfg.directions = 1;
      break;
    case CpcVariant::kCdck6:
      cfg.ar_hidden = 128;
      cfg.ar_layers = 1;
      cfg.directions = 2;
      break;
  }
  return cfg;
}

void CpcConfig::Validate() const {
  if (encoder_channels < 1 || ar_hidden < 1 || ar_layers < 1)
    throw ConfigError("CpcConfig: dimensions must be positive");
  if (directions != 1 && directions != 2)
    throw ConfigError(StrCat("CpcConfig: directions must be 1 or 2, got ",
                             directions));
  if (prediction_steps < 1)
    throw ConfigError("CpcConfig: prediction_steps must be >= 1");
  if (batch < 2)
    throw ConfigError("CpcConfig: batch must be >= 2 (in-batch negatives)");
  if (crop < kDownsample || crop % kDownsample != 0)
    throw ConfigError(StrCat("CpcConfig: crop must be a positive multiple of ",
                             kDownsample));
  if (CropFrames() <= prediction_steps)
    throw ConfigError("CpcConfig: crop too short for the prediction horizon");
  if (crops_per_utt < 1)
    throw ConfigError("CpcConfig: crops_per_utt must be >= 1");
}

// ---- model ------------------------------------------------------------------

Tensor GruCell(Tape *tape, const Tensor &x_t, const Tensor &h_prev,
               const GruLayerParams &params) {
  int hid = params.w_hh.Dim(1);
  Tensor gi = AddBiasRow(tape, MatMul(tape, x_t, params.w_ih, false, true),
                         params.b_ih);
  Tensor gh = AddBiasRow(tape, MatMul(tape, h_prev, params.w_hh, false, true),
                         params.b_hh);
  Tensor r = Sigmoid(tape, Add(tape, SliceCols(tape, gi, 0, hid),
                               SliceCols(tape, gh, 0, hid)));
  Tensor z = Sigmoid(tape, Add(tape, SliceCols(tape, gi, hid, 2 * hid),
                               SliceCols(tape, gh, hid, 2 * hid)));
  Tensor n = TanhOp(
      tape, Add(tape, SliceCols(tape, gi, 2 * hid, 3 * hid),
                Mul(tape, r, SliceCols(tape, gh, 2 * hid, 3 * hid))));
  // h' = n + z*(h_prev - n) = (1-z)*n + z*h_prev
  return Add(tape, n, Mul(tape, z, Sub(tape, h_prev, n)));
}

std::vector<Tensor> CpcModel::Parameters() {
  std::vector<Tensor> out;
  for (size_t i = 0; i < enc_weights.size(); i++) {
    out.push_back(enc_weights[i]);
    out.push_back(enc_biases[i]);
  }
  for (auto &dir : gru)
    for (auto &layer : dir) {
      out.push_back(layer.w_ih);
      out.push_back(layer.w_hh);
      out.push_back(layer.b_ih);
      out.push_back(layer.b_hh);
    }
  for (auto &dir : heads)
    for (auto &w : dir) out.push_back(w);
  return out;
}

int64_t CpcModel::CountParameterElements() const {
  int64_t n = 0;
  for (const auto &t : enc_weights) n += t.NumEl();
  for (const auto &t : enc_biases) n += t.NumEl();
  for (const auto &dir : gru)
    for (const auto &layer : dir)
      n += layer.w_ih.NumEl() + layer.w_hh.NumEl() + layer.b_ih.NumEl() +
           layer.b_hh.NumEl();
  for (const auto &dir : heads)
    for (const auto &t : dir) n += t.NumEl();
  return n;
}

int64_t ParameterCount(const CpcConfig &cfg) {
  cfg.Validate();
  int ch = cfg.encoder_channels;
  int64_t enc = 0;
  for (int l = 0; l < kEncoderLayers; l++) {
    int cin = l == 0 ? 1 : ch;
    enc += static_cast<int64_t>(cin) * ch * kEncoderKernels[l] + ch;
  }
  int64_t hid = cfg.ar_hidden;
  int64_t gru = 0;
  for (int l = 0; l < cfg.ar_layers; l++) {
    int64_t in = l == 0 ? ch : hid;
    gru += 3 * (hid * in + hid * hid + 2 * hid);
  }
  gru *= cfg.directions;
  int64_t heads = static_cast<int64_t>(cfg.directions) *
                  cfg.prediction_steps * hid * ch;
  return enc + gru + heads;
}

CpcModel InitCpcModel(const CpcConfig &cfg, uint64_t seed) {
  cfg.Validate();
  CpcModel model;
  model.config = cfg;
  Rng rng(MixSeed(seed, 0xc9c0));
  int ch = cfg.encoder_channels;
  for (int l = 0; l < kEncoderLayers; l++) {
    int cin = l == 0 ? 1 : ch;
    int fan_in = cin * kEncoderKernels[l];
    model.enc_weights.push_back(
        Tensor::UniformInit({ch, cin, kEncoderKernels[l]}, fan_in, rng));
    model.enc_biases.push_back(Tensor::Zeros({ch}, /*requires_grad=*/true));
  }
  int hid = cfg.ar_hidden;
  for (int d = 0; d < cfg.directions; d++) {
    std::vector<GruLayerParams> layers;
    for (int l = 0; l < cfg.ar_layers; l++) {
      int in = l == 0 ? ch : hid;
      GruLayerParams p;
      p.w_ih = Tensor::UniformInit({3 * hid, in}, in, rng);
      p.w_hh = Tensor::UniformInit({3 * hid, hid}, hid, rng);
      p.b_ih = Tensor::Zeros({3 * hid}, /*requires_grad=*/true);
      p.b_hh = Tensor::Zeros({3 * hid}, /*requires_grad=*/true);
      layers.push_back(std::move(p));
    }
    model.gru.push_back(std::move(layers));
  }
  for (int d = 0; d < cfg.directions; d++) {
    std::vector<Tensor> dir_heads;
    for (int s = 0; s < cfg.prediction_steps; s++)
      dir_heads.push_back(Tensor::UniformInit({hid, ch}, hid, rng));
    model.heads.push_back(std::move(dir_heads));
  }
  return model;
}

Tensor Encode(Tape *tape, CpcModel &model, const Tensor &segment) {
  if (segment.Rank() != 3 || segment.Dim(1) != 1)
    throw ContractError(StrCat("encode: expected [batch x 1 x len], got ",
                               segment.ShapeStr()));
  int len = segment.Dim(2);
  if (len < kDownsample || len % kDownsample != 0)
    throw ContractError(StrCat("encode: segment length ", len,
                               " is not a positive multiple of ", kDownsample));
  Tensor x = segment;
  for (int l = 0; l < kEncoderLayers; l++) {
    x = Conv1d(tape, x, model.enc_weights[l], &model.enc_biases[l],
               kEncoderStrides[l], kEncoderPaddings[l]);
    x = Relu(tape, x);
  }
  return x;
}

std::vector<Tensor> ArContext(Tape *tape, CpcModel &model,
                              const Tensor &latents, Direction dir) {
  if (dir == Direction::kBackward && model.config.directions < 2)
    throw ContractError(StrCat("ar_context: variant ",
                               CpcVariantName(model.config.variant),
                               " has no backward model"));
  int d = dir == Direction::kForward ? 0 : 1;
  int batch = latents.Dim(0);
  int T = latents.Dim(2);
  int hid = model.config.ar_hidden;
  int layers = model.config.ar_layers;

  std::vector<Tensor> h(static_cast<size_t>(layers));
  for (int l = 0; l < layers; l++) h[l] = Tensor::Zeros({batch, hid});

  std::vector<Tensor> contexts(static_cast<size_t>(T));
  for (int step = 0; step < T; step++) {
    int t = dir == Direction::kForward ? step : T - 1 - step;
    Tensor input = TimeSlice(tape, latents, t);
    for (int l = 0; l < layers; l++) {
      h[l] = GruCell(tape, input, h[l], model.gru[d][l]);
      input = h[l];
    }
    contexts[static_cast<size_t>(t)] = h[layers - 1];
  }
  return contexts;
}

double LossReport::Bound(int batch) const {
  return std::log(static_cast<double>(batch)) - loss_value;
}

LossReport InfoNceLoss(Tape *tape, CpcModel &model, const Tensor &latents,
                       const std::vector<Tensor> &contexts, Direction dir,
                       int anchor_t) {
  int batch = latents.Dim(0);
  int T = latents.Dim(2);
  int k = model.config.prediction_steps;
  if (batch < 2)
    throw DataError("infonce_loss: batch of 1 has no negatives");
  if (static_cast<int>(contexts.size()) != T)
    throw ContractError("infonce_loss: contexts do not cover all frames");
  // The backward model predicts toward earlier frames.
  int step_sign = dir == Direction::kForward ? 1 : -1;
  if (dir == Direction::kForward) {
    if (anchor_t < 0 || anchor_t + k > T - 1)
      throw ContractError(StrCat("infonce_loss: anchor ", anchor_t,
                                 " leaves no room for ", k, " steps in ", T,
                                 " frames"));
  } else {
    if (anchor_t - k < 0 || anchor_t > T - 1)
      throw ContractError(StrCat("infonce_loss: backward anchor ", anchor_t,
                                 " leaves no room for ", k, " steps"));
  }
  int d = dir == Direction::kForward ? 0 : 1;

  LossReport report;
  Tensor total;
  for (int tau = 1; tau <= k; tau++) {
    int target_t = anchor_t + step_sign * tau;
    Tensor l_tau = TimeSlice(tape, latents, target_t);          // [b x ch]
    Tensor proj = MatMul(tape, contexts[anchor_t], model.heads[d][tau - 1]);
    Tensor scores = MatMul(tape, proj, l_tau, false, true);     // [b x b]
    Tensor logsm = LogSoftmaxRows(tape, scores);
    Tensor step_loss = Scale(tape, MeanAll(tape, Diag(tape, logsm)), -1.0);
    total = tau == 1 ? step_loss : Add(tape, total, step_loss);
    if (tau == k) {
      // Accuracy on the last step only: rows whose argmax is the diagonal.
      int correct = 0;
      for (int i = 0; i < batch; i++) {
        const double *row = scores.Data() + static_cast<int64_t>(i) * batch;
        int best = 0;
        for (int j = 1; j < batch; j++)
          if (row[j] > row[best]) best = j;
        if (best == i) correct++;
      }
      report.accuracy = static_cast<double>(correct) / batch;
    }
  }
  report.loss = Scale(tape, total, 1.0 / k);
  report.loss_value = report.loss.At(0);
  return report;
}

Tensor JointLoss(Tape *tape, const Tensor &fwd_loss, const Tensor &bwd_loss) {
  return Scale(tape, Add(tape, fwd_loss, bwd_loss), 0.5);
}

FeatureMatrix ExtractContextFeatures(CpcModel &model, const Waveform &w) {
  int64_t len = static_cast<int64_t>(w.samples.size());
  if (len < kDownsample)
    throw DataError(StrCat("extract_context_features: waveform of ", len,
                           " samples is shorter than ", kDownsample));
  int64_t used = (len / kDownsample) * kDownsample;
  int T = static_cast<int>(used / kDownsample);

  std::vector<double> buf(w.samples.begin(), w.samples.begin() + used);
  Tensor segment =
      Tensor::FromValues({1, 1, static_cast<int>(used)}, std::move(buf));
  Tensor latents = Encode(nullptr, model, segment);
  std::vector<Tensor> fwd =
      ArContext(nullptr, model, latents, Direction::kForward);
  std::vector<Tensor> bwd;
  if (model.config.directions == 2)
    bwd = ArContext(nullptr, model, latents, Direction::kBackward);

  int hid = model.config.ar_hidden;
  FeatureMatrix out;
  out.kind = FeatureKind::kCpc;
  out.frame_shift_ms = 10.0;
  out.values.resize(T, model.config.FeatureDim());
  for (int t = 0; t < T; t++) {
    for (int j = 0; j < hid; j++) out.values(t, j) = fwd[t].At(j);
    if (!bwd.empty())
      for (int j = 0; j < hid; j++) out.values(t, hid + j) = bwd[t].At(j);
  }
  return out;
}

// ---- training ---------------------------------------------------------------

namespace {

struct CropRef {
  int utt;
  int64_t offset;
};

void FillSegment(const std::vector<Waveform> &utts,
                 const std::vector<CropRef> &crops, int crop, Tensor *segment) {
  double *dst = segment->Data();
  for (size_t i = 0; i < crops.size(); i++) {
    const auto &w = utts[static_cast<size_t>(crops[i].utt)];
    const double *src = w.samples.data() + crops[i].offset;
    std::copy(src, src + crop, dst + static_cast<int64_t>(i) * crop);
  }
}

std::vector<int> UsableUtterances(const std::vector<Waveform> &utts, int crop,
                                  const char *what) {
  std::vector<int> usable;
  for (size_t i = 0; i < utts.size(); i++) {
    if (static_cast<int64_t>(utts[i].samples.size()) >= crop) {
      usable.push_back(static_cast<int>(i));
    } else {
      Warn(StrCat("cpc_train: ", what, " utterance ", i, " has ",
                  utts[i].samples.size(), " samples < crop ", crop,
                  "; skipped"));
    }
  }
  return usable;
}

}  // namespace

CpcTrainResult CpcTrain(const std::vector<Waveform> &train_utts,
                        const std::vector<Waveform> &dev_utts,
                        const CpcConfig &cfg, int epochs, uint64_t seed,
                        std::ostream *log) {
  cfg.Validate();
  if (epochs < 1) throw ConfigError("cpc_train: epochs must be >= 1");
  std::vector<int> train_usable = UsableUtterances(train_utts, cfg.crop, "train");
  std::vector<int> dev_usable = UsableUtterances(dev_utts, cfg.crop, "dev");
  if (train_usable.empty())
    throw DataError("cpc_train: no usable training utterances");
  if (dev_usable.empty())
    throw DataError("cpc_train: no usable dev utterances");

  CpcModel model = InitCpcModel(cfg, MixSeed(seed, 1));
  std::vector<Tensor> params = model.Parameters();
  AdamState adam = MakeAdamState(params);
  Rng rng(MixSeed(seed, 2));

  int T = cfg.CropFrames();
  int k = cfg.prediction_steps;

  // A fixed dev batch and fixed anchors keep the dev metric comparable
  // across epochs.
  Rng dev_rng(MixSeed(seed, 3));
  std::vector<CropRef> dev_crops(static_cast<size_t>(cfg.batch));
  for (int i = 0; i < cfg.batch; i++) {
    int utt = dev_usable[static_cast<size_t>(i) % dev_usable.size()];
    int64_t span =
        static_cast<int64_t>(dev_utts[static_cast<size_t>(utt)].samples.size()) -
        cfg.crop + 1;
    dev_crops[static_cast<size_t>(i)] = {
        utt, static_cast<int64_t>(dev_rng.UniformInt(
                 static_cast<uint64_t>(span)))};
  }
  const int kDevAnchors = 4;
  std::vector<int> dev_anchors(kDevAnchors);
  for (int a = 0; a < kDevAnchors; a++)
    dev_anchors[static_cast<size_t>(a)] = k +
        static_cast<int>(dev_rng.UniformInt(static_cast<uint64_t>(T - 2 * k)));
  Tensor dev_segment = Tensor::Zeros({cfg.batch, 1, cfg.crop});
  FillSegment(dev_utts, dev_crops, cfg.crop, &dev_segment);

  auto evaluate_dev = [&]() {
    Tensor latents = Encode(nullptr, model, dev_segment);
    std::vector<Tensor> fwd =
        ArContext(nullptr, model, latents, Direction::kForward);
    std::vector<Tensor> bwd;
    if (cfg.directions == 2)
      bwd = ArContext(nullptr, model, latents, Direction::kBackward);
    double loss = 0.0, acc = 0.0;
    int n = 0;
    for (int a = 0; a < kDevAnchors; a++) {
      int t = dev_anchors[static_cast<size_t>(a)];
      LossReport r = InfoNceLoss(nullptr, model, latents, fwd,
                                 Direction::kForward, t);
      loss += r.loss_value;
      acc += r.accuracy;
      n++;
      if (cfg.directions == 2) {
        LossReport rb = InfoNceLoss(nullptr, model, latents, bwd,
                                    Direction::kBackward, T - 1 - t);
        loss += rb.loss_value;
        acc += rb.accuracy;
        n++;
      }
    }
    return std::make_pair(loss / n, acc / n);
  };

  CpcTrainResult result;
  result.best_dev_loss = std::numeric_limits<double>::infinity();
  std::vector<DoubleVec> best_values;

  for (int epoch = 1; epoch <= epochs; epoch++) {
    // Crop schedule: crops_per_utt reshuffled passes over the utterances.
    std::vector<CropRef> crops;
    crops.reserve(train_usable.size() * static_cast<size_t>(cfg.crops_per_utt));
    for (int pass = 0; pass < cfg.crops_per_utt; pass++) {
      std::vector<int> order = train_usable;
      rng.Shuffle(order);
      for (int utt : order) {
        int64_t span =
            static_cast<int64_t>(
                train_utts[static_cast<size_t>(utt)].samples.size()) -
            cfg.crop + 1;
        crops.push_back(
            {utt, static_cast<int64_t>(
                      rng.UniformInt(static_cast<uint64_t>(span)))});
      }
    }
    size_t num_batches = crops.size() / static_cast<size_t>(cfg.batch);
    if (num_batches == 0)
      throw DataError(StrCat("cpc_train: ", crops.size(),
                             " crops cannot fill a batch of ", cfg.batch,
                             "; raise crops_per_utt"));
    for (size_t b = 0; b < num_batches; b++) {
      std::vector<CropRef> batch_crops(
          crops.begin() + static_cast<long>(b * cfg.batch),
          crops.begin() + static_cast<long>((b + 1) * cfg.batch));
      Tensor segment = Tensor::Zeros({cfg.batch, 1, cfg.crop});
      FillSegment(train_utts, batch_crops, cfg.crop, &segment);

      Tape tape;
      Tensor latents = Encode(&tape, model, segment);
      std::vector<Tensor> fwd =
          ArContext(&tape, model, latents, Direction::kForward);
      // One uniform anchor per batch in [0, T-k-1]; the two-direction case
      // additionally needs room below the mirrored anchor, so it draws from
      // [k, T-k-1].
      int anchor =
          cfg.directions == 2
              ? k + static_cast<int>(
                        rng.UniformInt(static_cast<uint64_t>(T - 2 * k)))
              : static_cast<int>(
                    rng.UniformInt(static_cast<uint64_t>(T - k)));
      LossReport fr =
          InfoNceLoss(&tape, model, latents, fwd, Direction::kForward, anchor);
      Tensor loss = fr.loss;
      if (cfg.directions == 2) {
        std::vector<Tensor> bwd =
            ArContext(&tape, model, latents, Direction::kBackward);
        LossReport br = InfoNceLoss(&tape, model, latents, bwd,
                                    Direction::kBackward, T - 1 - anchor);
        loss = JointLoss(&tape, fr.loss, br.loss);
      }
      ZeroGrads(params);
      tape.Backward(loss);
      AdamStep(params, adam, cfg.learning_rate);
    }

    auto [dev_loss, dev_acc] = evaluate_dev();
    result.epochs.push_back({epoch, dev_loss, dev_acc});
    if (log != nullptr) {
      char line[96];
      std::snprintf(line, sizeof(line), "%d,%.6f,%.6f", epoch, dev_loss,
                    dev_acc);
      (*log) << line << "\n";
      log->flush();
    }
    if (dev_loss < result.best_dev_loss) {
      result.best_dev_loss = dev_loss;
      result.best_epoch = epoch;
      best_values.clear();
      for (auto &p : params) best_values.push_back(p.Values());
    }
  }

  // Keep the parameters of the best dev epoch.
  for (size_t i = 0; i < params.size(); i++) params[i].Values() = best_values[i];
  result.model = std::move(model);
  return result;
}

// ---- checkpoints --------------------------------------------------------------

namespace {

NamedTensor ToNamed(const std::string &name, const Tensor &t) {
  NamedTensor nt;
  nt.name = name;
  for (int d : t.Shape()) nt.shape.push_back(static_cast<uint32_t>(d));
  nt.values.reserve(static_cast<size_t>(t.NumEl()));
  for (int64_t i = 0; i < t.NumEl(); i++)
    nt.values.push_back(static_cast<float>(t.At(i)));
  return nt;
}

void FromNamed(const NamedTensor &nt, Tensor *t) {
  if (static_cast<int64_t>(nt.values.size()) != t->NumEl())
    throw FormatError(StrCat("checkpoint: tensor '", nt.name, "' has ",
                             nt.values.size(), " values, expected ",
                             t->NumEl()));
  for (size_t i = 0; i < nt.values.size(); i++)
    t->At(static_cast<int64_t>(i)) = nt.values[i];
}

std::vector<std::pair<std::string, Tensor>> NamedParameters(CpcModel &model) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (size_t l = 0; l < model.enc_weights.size(); l++) {
    out.emplace_back(StrCat("enc.", l, ".weight"), model.enc_weights[l]);
    out.emplace_back(StrCat("enc.", l, ".bias"), model.enc_biases[l]);
  }
  for (size_t d = 0; d < model.gru.size(); d++)
    for (size_t l = 0; l < model.gru[d].size(); l++) {
      out.emplace_back(StrCat("gru.", d, ".", l, ".w_ih"),
                       model.gru[d][l].w_ih);
      out.emplace_back(StrCat("gru.", d, ".", l, ".w_hh"),
                       model.gru[d][l].w_hh);
      out.emplace_back(StrCat("gru.", d, ".", l, ".b_ih"),
                       model.gru[d][l].b_ih);
      out.emplace_back(StrCat("gru.", d, ".", l, ".b_hh"),
                       model.gru[d][l].b_hh);
    }
  for (size_t d = 0; d < model.heads.size(); d++)
    for (size_t s = 0; s < model.heads[d].size(); s++)
      out.emplace_back(StrCat("head.", d, ".", s), model.heads[d][s]);
  return out;
}

}  // namespace

void SaveCpcCheckpoint(const std::string &path, CpcModel &model,
                       const CpcCheckpointMeta &meta) {
  std::vector<NamedTensor> tensors;
  const CpcConfig &c = model.config;
  NamedTensor config;
  config.name = "config";
  config.shape = {7};
  config.values = {static_cast<float>(static_cast<int>(c.variant)),
                   static_cast<float>(c.encoder_channels),
                   static_cast<float>(c.ar_hidden),
                   static_cast<float>(c.ar_layers),
                   static_cast<float>(c.directions),
                   static_cast<float>(c.prediction_steps),
                   static_cast<float>(c.crop)};
  tensors.push_back(std::move(config));
  for (auto &[name, t] : NamedParameters(model)) tensors.push_back(ToNamed(name, t));
  WriteContainer(path, tensors);

  std::ofstream meta_os(path + ".meta");
  if (!meta_os) throw DataError(StrCat("checkpoint: cannot write ", path,
                                       ".meta"));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", meta.dev_loss);
  meta_os << "variant=" << meta.variant << "\n"
          << "epoch=" << meta.epoch << "\n"
          << "dev_loss=" << buf << "\n";
}

CpcModel LoadCpcCheckpoint(const std::string &path, CpcCheckpointMeta *meta) {
  std::vector<NamedTensor> tensors = ReadContainer(path);
  if (tensors.empty() || tensors[0].name != "config" ||
      tensors[0].values.size() != 7)
    throw FormatError(StrCat("checkpoint: missing config record: ", path));
  const auto &cv = tensors[0].values;
  CpcConfig cfg;
  cfg.variant = static_cast<CpcVariant>(static_cast<int>(cv[0]));
  cfg.encoder_channels = static_cast<int>(cv[1]);
  cfg.ar_hidden = static_cast<int>(cv[2]);
  cfg.ar_layers = static_cast<int>(cv[3]);
  cfg.directions = static_cast<int>(cv[4]);
  cfg.prediction_steps = static_cast<int>(cv[5]);
  cfg.crop = static_cast<int>(cv[6]);
  CpcModel model = InitCpcModel(cfg, 0);

  std::map<std::string, const NamedTensor *> by_name;
  for (size_t i = 1; i < tensors.size(); i++)
    by_name[tensors[i].name] = &tensors[i];
  for (auto &[name, t] : NamedParameters(model)) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw FormatError(StrCat("checkpoint: missing tensor '", name, "' in ",
                               path));
    FromNamed(*it->second, &t);
    by_name.erase(it);
  }
  if (!by_name.empty())
    throw FormatError(StrCat("checkpoint: unexpected tensor '",
                             by_name.begin()->first, "' in ", path));

  if (meta != nullptr) {
    std::ifstream meta_is(path + ".meta");
    if (meta_is) {
      std::string line;
      while (std::getline(meta_is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "variant") meta->variant = val;
        else if (key == "epoch") meta->epoch = std::stoi(val);
        else if (key == "dev_loss") meta->dev_loss = std::stod(val);
      }
    }
  }
  return model;
}

}  // namespace cpcv
