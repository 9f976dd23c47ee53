// tools/src/cpcv_main.cc

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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cpcv/common.h"
#include "cpcv/manifest.h"
#include "cpcv/nce.h"
#include "cpcv/pipeline.h"
#include "cpcv/rng.h"
#include "cpcv/synth.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;

struct StageArgs {
  std::string config;
  std::string workdir = "work";
  int64_t seed = -1;  // -1 = keep the config's seed
};

cpcv::PipelineConfig LoadConfig(const StageArgs &args) {
  if (args.config.empty())
    throw cpcv::ConfigError("--config is required for pipeline stages");
  cpcv::PipelineConfig cfg = cpcv::PipelineConfig::FromFile(args.config);
  if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
  return cfg;
}

int RunStageCommand(const std::string &stage, const StageArgs &args) {
  cpcv::PipelineConfig cfg = LoadConfig(args);
  cpcv::StageResult r = cpcv::RunStage(stage, cfg, args.workdir);
  if (r.skipped) {
    std::cout << stage << ": up to date\n";
  } else {
    std::cout << stage << ": done\n";
    for (const auto &o : r.outputs) std::cout << "  " << o << "\n";
  }
  return kExitOk;
}

int RunMiBound(int classes, int batch, int trials, uint64_t seed,
               const std::string &out_path) {
  std::ofstream os(out_path);
  if (!os) throw cpcv::DataError("mi-bound: cannot write " + out_path);
  os << "trial,I_true,loss,bound\n";
  char buf[160];
  for (int i = 0; i < trials; i++) {
    cpcv::DiscreteJoint channel =
        cpcv::RandomChannel(classes, cpcv::MixSeed(seed, 1000 + i));
    cpcv::BoundExperimentResult r = cpcv::InfoNceBoundExperiment(
        channel, batch, /*train_steps=*/1500, /*eval_batches=*/2000,
        cpcv::MixSeed(seed, 2000 + i));
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f", i,
                  r.mutual_information, r.mean_loss, r.bound);
    os << buf << "\n";
  }
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"CPC speaker-verification workbench"};
  app.require_subcommand(1);

  StageArgs stage_args;
  // The pipeline stages, each with the same options.
  for (const char *const stage : cpcv::kStageNames) {
    CLI::App *sub = app.add_subcommand(
        stage, std::string("run the ") + stage + " stage");
    sub->add_option("--config", stage_args.config, "key=value config file");
    sub->add_option("--workdir", stage_args.workdir, "artifact directory");
    sub->add_option("--seed", stage_args.seed, "override the config seed");
  }

  CLI::App *run_all = app.add_subcommand("run-all",
                                         "run every stage for this config");
  run_all->add_option("--config", stage_args.config, "key=value config file");
  run_all->add_option("--workdir", stage_args.workdir, "artifact directory");
  run_all->add_option("--seed", stage_args.seed, "override the config seed");

  CLI::App *show = app.add_subcommand("show-config",
                                      "print the effective configuration");
  show->add_option("--config", stage_args.config,
                   "config file (defaults printed when omitted)");

  std::string ingest_dir;
  CLI::App *ingest = app.add_subcommand("ingest",
                                        "scan a corpus tree and print its manifest");
  ingest->add_option("dir", ingest_dir, "corpus root")->required();

  std::string toy_root;
  int64_t toy_seed = 1;
  CLI::App *toy = app.add_subcommand("make-toy-corpus",
                                     "synthesize a small filtered-noise corpus");
  toy->add_option("dir", toy_root, "output root")->required();
  toy->add_option("--seed", toy_seed, "generator seed");

  int mi_classes = 8, mi_batch = 16, mi_trials = 20;
  int64_t mi_seed = 1;
  std::string mi_out = "mi_bound.csv";
  CLI::App *mi = app.add_subcommand(
      "mi-bound", "estimator experiment: batch-softmax bound vs analytic I");
  mi->add_option("--classes", mi_classes, "channel alphabet size");
  mi->add_option("--batch", mi_batch, "softmax batch size");
  mi->add_option("--trials", mi_trials, "number of random channels");
  mi->add_option("--seed", mi_seed, "experiment seed");
  mi->add_option("--out", mi_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const char *const stage : cpcv::kStageNames)
      if (app.got_subcommand(stage)) return RunStageCommand(stage, stage_args);

    if (app.got_subcommand("run-all")) {
      cpcv::PipelineConfig cfg = LoadConfig(stage_args);
      for (const auto &r : cpcv::RunPipeline(cfg, stage_args.workdir))
        std::cout << r.stage << (r.skipped ? ": up to date" : ": done") << "\n";
      return kExitOk;
    }
    if (app.got_subcommand("show-config")) {
      cpcv::PipelineConfig cfg =
          stage_args.config.empty()
              ? cpcv::PipelineConfig()
              : cpcv::PipelineConfig::FromFile(stage_args.config);
      std::cout << cfg.Serialize();
      return kExitOk;
    }
    if (app.got_subcommand("ingest")) {
      cpcv::Manifest m = cpcv::Ingest(ingest_dir);
      char buf[32];
      for (const auto &r : m.rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.duration_s);
        std::cout << r.utt_id << "\t" << r.speaker << "\t" << r.chapter << "\t"
                  << r.path << "\t" << buf << "\n";
      }
      return kExitOk;
    }
    if (app.got_subcommand("make-toy-corpus")) {
      cpcv::ToyCorpusOptions opts;
      cpcv::MakeToyCorpus(toy_root, opts, static_cast<uint64_t>(toy_seed));
      std::cout << "wrote " << toy_root << "/{train,dev,eval}\n";
      return kExitOk;
    }
    if (app.got_subcommand("mi-bound"))
      return RunMiBound(mi_classes, mi_batch, mi_trials,
                        static_cast<uint64_t>(mi_seed), mi_out);
  } catch (const cpcv::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const cpcv::DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const cpcv::FormatError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const cpcv::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
