// core/include/cpcv/pipeline.h

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

#ifndef CPCV_PIPELINE_H_
#define CPCV_PIPELINE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace cpcv {

// Line-based key=value configuration with '#' comments. Unknown keys are
// configuration errors.
struct PipelineConfig {
  // Corpus roots in speaker/chapter/*.wav layout.
  std::string train_dir;
  std::string dev_dir;   // CPC validation split
  std::string eval_dir;  // trials are drawn from here

  std::string feature = "mfcc";  // mfcc | cpc | fused
  bool mfcc_deltas = false;      // keeps MFCC at 24 dims when off
  int mfcc_delta_order = 2;

  std::string cpc_variant = "CDCK2";
  int cpc_encoder_channels = 512;
  int cpc_ar_hidden = 0;  // 0 = variant default
  int cpc_ar_layers = 0;  // 0 = variant default
  int cpc_epochs = 20;
  double cpc_lr = 1e-4;
  int cpc_batch = 64;
  int cpc_crop = 20480;
  int cpc_prediction_steps = 12;
  int cpc_crops_per_utt = 1;

  std::string summarization = "pool";  // pool | ivector
  int pca_dim = 0;                     // frame-level CPC PCA; 0 = off
  int lda_dim = 24;
  int ubm_mixtures = 64;
  int ubm_iters = 10;
  int ivector_dim = 50;
  int tv_iters = 5;
  int plda_iters = 10;
  double map_relevance = 16.0;

  int protocol = 1;
  double dcf_c_frr = 10.0;
  double dcf_c_far = 1.0;
  double dcf_p_target = 0.01;

  uint64_t seed = 42;

  static PipelineConfig FromFile(const std::string &path);
  static PipelineConfig FromString(const std::string &text);
  void Set(const std::string &key, const std::string &value);
  void Validate() const;
  // Canonical key=value form (also the show-config output).
  std::string Serialize() const;
};

// Pipeline stages in the order the full run executes them. "fuse" only
// applies to the fused feature, the i-vector stages only to
// summarization=ivector, and "pool" only to summarization=pool.
extern const char *const kStageNames[12];

struct StageResult {
  std::string stage;
  bool skipped = false;  // receipt matched; nothing re-run
  std::vector<std::string> outputs;
};

// Runs one stage in workdir. Stages are idempotent: a stage whose receipt
// still matches its inputs, parameters, and outputs is skipped and the
// receipt file is left untouched. Missing prerequisites raise DataError
// naming the stage that produces them.
StageResult RunStage(const std::string &stage, const PipelineConfig &cfg,
                     const std::string &workdir);

// Stage names needed for this configuration, in execution order.
std::vector<std::string> StageSequence(const PipelineConfig &cfg);

// Runs the full sequence; returns one result per stage.
std::vector<StageResult> RunPipeline(const PipelineConfig &cfg,
                                     const std::string &workdir);

// Experiment directory for the scoring/eval/plot artifacts of a config,
// e.g. <workdir>/exp/cpc_pool_p1.
std::string ExperimentDir(const PipelineConfig &cfg,
                          const std::string &workdir);

// Reads "eer <v>" from an eval stage metrics.txt.
double ReadEerFromMetrics(const std::string &metrics_path);

// Worker-count override honored by per-utterance stages (the only
// environment variable the pipeline consults).
int PipelineWorkerCount();

}  // namespace cpcv

#endif  // CPCV_PIPELINE_H_
