// core/src/pipeline.cc

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

#include "cpcv/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cpcv/audio.h"
#include "cpcv/common.h"
#include "cpcv/container.h"
#include "cpcv/cpc.h"
#include "cpcv/embedding.h"
#include "cpcv/feature_archive.h"
#include "cpcv/gmm.h"
#include "cpcv/hash.h"
#include "cpcv/ivector.h"
#include "cpcv/manifest.h"
#include "cpcv/metrics.h"
#include "cpcv/mfcc.h"
#include "cpcv/plots.h"
#include "cpcv/rng.h"
#include "cpcv/stats_io.h"

namespace fs = std::filesystem;

namespace cpcv {

const char *const kStageNames[12] = {
    "extract-mfcc", "train-cpc",      "extract-cpc",   "fuse",
    "train-ubm",    "train-tv",       "extract-ivectors", "pool",
    "train-backend", "score",         "eval",          "plot"};

// ---- config -----------------------------------------------------------------

void PipelineConfig::Set(const std::string &key, const std::string &value) {
  auto to_int = [&](const std::string &v) {
    try {
      return std::stoi(v);
    } catch (...) {
      throw ConfigError(StrCat("config: bad integer for ", key, ": '", v, "'"));
    }
  };
  auto to_double = [&](const std::string &v) {
    try {
      return std::stod(v);
    } catch (...) {
      throw ConfigError(StrCat("config: bad number for ", key, ": '", v, "'"));
    }
  };
  auto to_bool = [&](const std::string &v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(StrCat("config: bad boolean for ", key, ": '", v, "'"));
  };

  if (key == "train_dir") train_dir = value;
  else if (key == "dev_dir") dev_dir = value;
  else if (key == "eval_dir") eval_dir = value;
  else if (key == "feature") feature = value;
  else if (key == "mfcc_deltas") mfcc_deltas = to_bool(value);
  else if (key == "mfcc_delta_order") mfcc_delta_order = to_int(value);
  else if (key == "cpc_variant") cpc_variant = value;
  else if (key == "cpc_encoder_channels") cpc_encoder_channels = to_int(value);
  else if (key == "cpc_ar_hidden") cpc_ar_hidden = to_int(value);
  else if (key == "cpc_ar_layers") cpc_ar_layers = to_int(value);
  else if (key == "cpc_epochs") cpc_epochs = to_int(value);
  else if (key == "cpc_lr") cpc_lr = to_double(value);
  else if (key == "cpc_batch") cpc_batch = to_int(value);
  else if (key == "cpc_crop") cpc_crop = to_int(value);
  else if (key == "cpc_prediction_steps") cpc_prediction_steps = to_int(value);
  else if (key == "cpc_crops_per_utt") cpc_crops_per_utt = to_int(value);
  else if (key == "summarization") summarization = value;
  else if (key == "pca_dim") pca_dim = to_int(value);
  else if (key == "lda_dim") lda_dim = to_int(value);
  else if (key == "ubm_mixtures") ubm_mixtures = to_int(value);
  else if (key == "ubm_iters") ubm_iters = to_int(value);
  else if (key == "ivector_dim") ivector_dim = to_int(value);
  else if (key == "tv_iters") tv_iters = to_int(value);
  else if (key == "plda_iters") plda_iters = to_int(value);
  else if (key == "map_relevance") map_relevance = to_double(value);
  else if (key == "protocol") protocol = to_int(value);
  else if (key == "dcf_c_frr") dcf_c_frr = to_double(value);
  else if (key == "dcf_c_far") dcf_c_far = to_double(value);
  else if (key == "dcf_p_target") dcf_p_target = to_double(value);
  else if (key == "seed") seed = static_cast<uint64_t>(to_int(value));
  else throw ConfigError(StrCat("config: unknown key '", key, "'"));
}

PipelineConfig PipelineConfig::FromString(const std::string &text) {
  PipelineConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // Trim.
    auto b = line.find_first_not_of(" \t\r");
    auto e = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b, e - b + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(StrCat("config line ", lineno, ": expected key=value, "
                               "got '", line, "'"));
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto ke = key.find_last_not_of(" \t");
    key = key.substr(0, ke + 1);
    auto vb = value.find_first_not_of(" \t");
    value = vb == std::string::npos ? "" : value.substr(vb);
    cfg.Set(key, value);
  }
  cfg.Validate();
  return cfg;
}

PipelineConfig PipelineConfig::FromFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(StrCat("config: cannot open: ", path));
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return FromString(text);
}

void PipelineConfig::Validate() const {
  if (feature != "mfcc" && feature != "cpc" && feature != "fused")
    throw ConfigError(StrCat("config: feature must be mfcc|cpc|fused, got '",
                             feature, "'"));
  if (summarization != "pool" && summarization != "ivector")
    throw ConfigError(StrCat("config: summarization must be pool|ivector, "
                             "got '", summarization, "'"));
  if (protocol != 1 && protocol != 2)
    throw ConfigError(StrCat("config: protocol must be 1 or 2, got ",
                             protocol));
  if (mfcc_delta_order != 1 && mfcc_delta_order != 2)
    throw ConfigError("config: mfcc_delta_order must be 1 or 2");
  if (pca_dim < 0) throw ConfigError("config: pca_dim must be >= 0");
  if (lda_dim < 1) throw ConfigError("config: lda_dim must be >= 1");
  if (ubm_mixtures < 1 || ubm_iters < 1 || ivector_dim < 1 || tv_iters < 1 ||
      plda_iters < 1)
    throw ConfigError("config: backend iteration/size knobs must be >= 1");
  if (dcf_c_frr <= 0 || dcf_c_far <= 0)
    throw ConfigError("config: DCF costs must be positive");
  if (!(dcf_p_target > 0 && dcf_p_target < 1))
    throw ConfigError("config: dcf_p_target must lie in (0,1)");
  CpcVariantFromName(cpc_variant);  // must parse
}

std::string PipelineConfig::Serialize() const {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "train_dir=" << train_dir << "\n";
  os << "dev_dir=" << dev_dir << "\n";
  os << "eval_dir=" << eval_dir << "\n";
  os << "feature=" << feature << "\n";
  os << "mfcc_deltas=" << (mfcc_deltas ? "true" : "false") << "\n";
  os << "mfcc_delta_order=" << mfcc_delta_order << "\n";
  os << "cpc_variant=" << cpc_variant << "\n";
  os << "cpc_encoder_channels=" << cpc_encoder_channels << "\n";
  os << "cpc_ar_hidden=" << cpc_ar_hidden << "\n";
  os << "cpc_ar_layers=" << cpc_ar_layers << "\n";
  os << "cpc_epochs=" << cpc_epochs << "\n";
  os << "cpc_lr=" << num(cpc_lr) << "\n";
  os << "cpc_batch=" << cpc_batch << "\n";
  os << "cpc_crop=" << cpc_crop << "\n";
  os << "cpc_prediction_steps=" << cpc_prediction_steps << "\n";
  os << "cpc_crops_per_utt=" << cpc_crops_per_utt << "\n";
  os << "summarization=" << summarization << "\n";
  os << "pca_dim=" << pca_dim << "\n";
  os << "lda_dim=" << lda_dim << "\n";
  os << "ubm_mixtures=" << ubm_mixtures << "\n";
  os << "ubm_iters=" << ubm_iters << "\n";
  os << "ivector_dim=" << ivector_dim << "\n";
  os << "tv_iters=" << tv_iters << "\n";
  os << "plda_iters=" << plda_iters << "\n";
  os << "map_relevance=" << num(map_relevance) << "\n";
  os << "protocol=" << protocol << "\n";
  os << "dcf_c_frr=" << num(dcf_c_frr) << "\n";
  os << "dcf_c_far=" << num(dcf_c_far) << "\n";
  os << "dcf_p_target=" << num(dcf_p_target) << "\n";
  os << "seed=" << seed << "\n";
  return os.str();
}

// ---- small utilities ----------------------------------------------------------

int PipelineWorkerCount() {
  const char *env = std::getenv("CPCV_WORKERS");
  if (env != nullptr) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

// Ordered fan-out: fn(i) runs on a worker pool, results are collected by
// index by the caller's own storage.
void ParallelFor(int n, const std::function<void(int)> &fn) {
  int workers = std::min(PipelineWorkerCount(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; i++) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; w++) {
    pool.emplace_back([&]() {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Paths {
  fs::path work;
  explicit Paths(const std::string &workdir) : work(workdir) {}
  fs::path Features(const std::string &name) const {
    return work / "features" / name;
  }
  fs::path Models(const std::string &name) const {
    return work / "models" / name;
  }
  fs::path Embeddings(const std::string &name) const {
    return work / "embeddings" / name;
  }
  fs::path Receipt(const std::string &key) const {
    return work / "receipts" / (key + ".receipt");
  }
};

std::string FeatureArkName(const PipelineConfig &cfg) {
  if (cfg.feature == "mfcc") return "mfcc.ark";
  if (cfg.feature == "cpc")
    return cfg.pca_dim > 0 ? "cpc_pca.ark" : "cpc.ark";
  return "fused.ark";
}

std::string EmbeddingArkName(const PipelineConfig &cfg) {
  return StrCat(cfg.summarization, "_", cfg.feature, ".ark");
}

std::string BackendName(const PipelineConfig &cfg) {
  return StrCat("backend_", cfg.feature, "_", cfg.summarization, ".bin");
}

std::string ExpTag(const PipelineConfig &cfg) {
  return StrCat(cfg.feature, "_", cfg.summarization, "_p", cfg.protocol);
}

// Per-stage seeds derived from the configured seed.
enum StageSeed : uint64_t {
  kSeedCpc = 11,
  kSeedUbm = 12,
  kSeedTv = 13,
  kSeedTrials = 14,
};

void RequireFile(const fs::path &p, const std::string &stage,
                 const std::string &producer) {
  if (!fs::exists(p))
    throw DataError(StrCat(stage, ": missing ", p.string(), "; run stage ",
                           producer, " first"));
}

// ---- receipts -----------------------------------------------------------------

struct StageSpec {
  std::string key;                   // receipt identity
  std::string params;                // canonical parameter string
  std::vector<std::string> inputs;   // existing files
  std::vector<std::string> outputs;  // produced files
};

bool ReceiptMatches(const Paths &paths, const StageSpec &spec) {
  fs::path rp = paths.Receipt(spec.key);
  if (!fs::exists(rp)) return false;
  std::ifstream is(rp);
  if (!is) return false;
  std::map<std::string, std::string> inputs, outputs;
  std::string params_hash;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "params") {
      ls >> params_hash;
    } else if (tag == "input" || tag == "output") {
      std::string hash, path;
      ls >> hash;
      std::getline(ls, path);
      auto b = path.find_first_not_of(' ');
      if (b == std::string::npos) return false;
      path = path.substr(b);
      (tag == "input" ? inputs : outputs)[path] = hash;
    }
  }
  if (params_hash != ContentHash(spec.params)) return false;
  if (inputs.size() != spec.inputs.size()) return false;
  for (const auto &in : spec.inputs) {
    auto it = inputs.find(in);
    if (it == inputs.end() || !fs::exists(in)) return false;
    if (FileContentHash(in) != it->second) return false;
  }
  for (const auto &[path, hash] : outputs) {
    if (!fs::exists(path)) return false;
    if (FileContentHash(path) != hash) return false;
  }
  return true;
}

void WriteReceipt(const Paths &paths, const StageSpec &spec, int64_t wall_ms) {
  fs::create_directories(paths.Receipt(spec.key).parent_path());
  std::ofstream os(paths.Receipt(spec.key));
  if (!os)
    throw DataError(StrCat("cannot write receipt for stage ", spec.key));
  os << "stage " << spec.key << "\n";
  os << "params " << ContentHash(spec.params) << "\n";
  for (const auto &in : spec.inputs)
    os << "input " << FileContentHash(in) << " " << in << "\n";
  for (const auto &out : spec.outputs) {
    if (!fs::exists(out))
      throw DataError(StrCat("stage ", spec.key, " did not produce ", out));
    os << "output " << FileContentHash(out) << " " << out << "\n";
  }
  os << "wall_ms " << wall_ms << "\n";
}

// ---- shared stage helpers -------------------------------------------------------

std::vector<std::string> WavPaths(const Manifest &m) {
  std::vector<std::string> out;
  out.reserve(m.rows.size());
  for (const auto &r : m.rows) out.push_back(r.path);
  return out;
}

CpcConfig BuildCpcConfig(const PipelineConfig &cfg) {
  CpcConfig c = CpcConfig::ForVariant(CpcVariantFromName(cfg.cpc_variant));
  c.encoder_channels = cfg.cpc_encoder_channels;
  if (cfg.cpc_ar_hidden > 0) c.ar_hidden = cfg.cpc_ar_hidden;
  if (cfg.cpc_ar_layers > 0) c.ar_layers = cfg.cpc_ar_layers;
  c.prediction_steps = cfg.cpc_prediction_steps;
  c.batch = cfg.cpc_batch;
  c.crop = cfg.cpc_crop;
  c.learning_rate = cfg.cpc_lr;
  c.crops_per_utt = cfg.cpc_crops_per_utt;
  c.Validate();
  return c;
}

// Features for every manifest row, fanned out over the worker pool but
// written in manifest order.
void ExtractToArchive(const Manifest &m, const std::string &ark_path,
                      const std::function<FeatureMatrix(const Waveform &)> &fn) {
  int n = static_cast<int>(m.rows.size());
  std::vector<FeatureMatrix> results(static_cast<size_t>(n));
  ParallelFor(n, [&](int i) {
    Waveform w = LoadWav(m.rows[static_cast<size_t>(i)].path);
    results[static_cast<size_t>(i)] = fn(w);
  });
  FeatureArchiveWriter writer(ark_path);
  for (int i = 0; i < n; i++)
    writer.Write(m.rows[static_cast<size_t>(i)].utt_id,
                 results[static_cast<size_t>(i)]);
  writer.Close();
}

// Loads utterance-level embeddings (rows == 1 records).
EmbeddingSet LoadEmbeddings(const std::string &ark_path) {
  FeatureArchiveReader reader(ark_path);
  EmbeddingSet set;
  for (const auto &id : reader.Ids()) {
    FeatureMatrix f = reader.Read(id);
    if (f.Rows() != 1)
      throw FormatError(StrCat("embedding archive record '", id,
                               "' has ", f.Rows(), " rows"));
    set.entries[id] = f.values.row(0).transpose();
    std::string speaker;
    ParseUttId(id, &speaker, nullptr, nullptr);
    set.labels[id] = speaker;
  }
  return set;
}

void SaveEmbeddings(const std::string &ark_path, const EmbeddingSet &set,
                    const std::vector<std::string> &order) {
  FeatureArchiveWriter writer(ark_path);
  for (const auto &id : order) {
    FeatureMatrix f;
    f.kind = FeatureKind::kEmbedding;
    f.values = set.entries.at(id).transpose();
    writer.Write(id, f);
  }
  writer.Close();
}

// ---- model containers -----------------------------------------------------------

NamedTensor MatTensor(const std::string &name, const Eigen::MatrixXd &m) {
  NamedTensor t;
  t.name = name;
  t.shape = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
  t.values.reserve(static_cast<size_t>(m.size()));
  for (int r = 0; r < m.rows(); r++)
    for (int c = 0; c < m.cols(); c++)
      t.values.push_back(static_cast<float>(m(r, c)));
  return t;
}

NamedTensor VecTensor(const std::string &name, const Eigen::VectorXd &v) {
  NamedTensor t;
  t.name = name;
  t.shape = {static_cast<uint32_t>(v.size())};
  t.values.reserve(static_cast<size_t>(v.size()));
  for (int i = 0; i < v.size(); i++)
    t.values.push_back(static_cast<float>(v[i]));
  return t;
}

Eigen::MatrixXd ToMat(const NamedTensor &t) {
  if (t.shape.size() != 2)
    throw FormatError(StrCat("model container: '", t.name, "' is not a matrix"));
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  size_t k = 0;
  for (uint32_t r = 0; r < t.shape[0]; r++)
    for (uint32_t c = 0; c < t.shape[1]; c++) m(r, c) = t.values[k++];
  return m;
}

Eigen::VectorXd ToVec(const NamedTensor &t) {
  if (t.shape.size() != 1)
    throw FormatError(StrCat("model container: '", t.name, "' is not a vector"));
  Eigen::VectorXd v(t.shape[0]);
  for (uint32_t i = 0; i < t.shape[0]; i++) v[i] = t.values[i];
  return v;
}

const NamedTensor &FindTensor(const std::vector<NamedTensor> &ts,
                              const std::string &name,
                              const std::string &path) {
  for (const auto &t : ts)
    if (t.name == name) return t;
  throw FormatError(StrCat("model container ", path, ": missing '", name, "'"));
}

void SaveUbm(const std::string &path, const DiagGmm &gmm) {
  WriteContainer(path, {VecTensor("weights", gmm.weights),
                        MatTensor("means", gmm.means),
                        MatTensor("vars", gmm.vars)});
}

DiagGmm LoadUbm(const std::string &path) {
  auto ts = ReadContainer(path);
  DiagGmm gmm;
  gmm.weights = ToVec(FindTensor(ts, "weights", path));
  gmm.means = ToMat(FindTensor(ts, "means", path));
  gmm.vars = ToMat(FindTensor(ts, "vars", path));
  // Weights are f32-rounded on disk; restore exact normalization.
  gmm.weights /= gmm.weights.sum();
  gmm.Validate();
  return gmm;
}

void SaveTv(const std::string &path, const TotalVariabilityModel &tv) {
  WriteContainer(path, {VecTensor("ubm.weights", tv.ubm.weights),
                        MatTensor("ubm.means", tv.ubm.means),
                        MatTensor("ubm.vars", tv.ubm.vars),
                        MatTensor("T", tv.t)});
}

TotalVariabilityModel LoadTv(const std::string &path) {
  auto ts = ReadContainer(path);
  TotalVariabilityModel tv;
  tv.ubm.weights = ToVec(FindTensor(ts, "ubm.weights", path));
  tv.ubm.means = ToMat(FindTensor(ts, "ubm.means", path));
  tv.ubm.vars = ToMat(FindTensor(ts, "ubm.vars", path));
  tv.ubm.weights /= tv.ubm.weights.sum();
  tv.t = ToMat(FindTensor(ts, "T", path));
  tv.Validate();
  return tv;
}

struct BackendModel {
  Eigen::VectorXd mean;
  LdaModel lda;
  PldaModel plda;
};

void SaveBackend(const std::string &path, const BackendModel &b) {
  WriteContainer(path, {VecTensor("mean", b.mean),
                        MatTensor("lda_basis", b.lda.basis),
                        VecTensor("lda_eigs", b.lda.eigenvalues),
                        VecTensor("plda_mu", b.plda.mu),
                        MatTensor("plda_between", b.plda.between),
                        MatTensor("plda_within", b.plda.within)});
}

BackendModel LoadBackend(const std::string &path) {
  auto ts = ReadContainer(path);
  BackendModel b;
  b.mean = ToVec(FindTensor(ts, "mean", path));
  b.lda.basis = ToMat(FindTensor(ts, "lda_basis", path));
  b.lda.eigenvalues = ToVec(FindTensor(ts, "lda_eigs", path));
  b.plda.mu = ToVec(FindTensor(ts, "plda_mu", path));
  b.plda.between = ToMat(FindTensor(ts, "plda_between", path));
  b.plda.within = ToMat(FindTensor(ts, "plda_within", path));
  b.plda.FinishScoring();
  return b;
}

// ---- stage bodies ----------------------------------------------------------------

struct StageContext {
  const PipelineConfig &cfg;
  Paths paths;
  StageSpec spec;
};

void StageExtractMfcc(StageContext &ctx) {
  Manifest train = Ingest(ctx.cfg.train_dir);
  Manifest eval = Ingest(ctx.cfg.eval_dir);
  Manifest all;
  all.rows = train.rows;
  all.rows.insert(all.rows.end(), eval.rows.begin(), eval.rows.end());
  FeatureConfig fc;
  bool deltas = ctx.cfg.mfcc_deltas;
  int order = ctx.cfg.mfcc_delta_order;
  ExtractToArchive(all, ctx.paths.Features("mfcc.ark").string(),
                   [&fc, deltas, order](const Waveform &w) {
                     FeatureMatrix f = ComputeMfcc(w, fc);
                     if (deltas) f = AppendDeltas(f, order);
                     return f;
                   });
}

void StageTrainCpc(StageContext &ctx) {
  Manifest train = Ingest(ctx.cfg.train_dir);
  Manifest dev = Ingest(ctx.cfg.dev_dir);
  std::vector<Waveform> train_w, dev_w;
  train_w.reserve(train.rows.size());
  for (const auto &r : train.rows) train_w.push_back(LoadWav(r.path));
  for (const auto &r : dev.rows) dev_w.push_back(LoadWav(r.path));

  CpcConfig cc = BuildCpcConfig(ctx.cfg);
  std::ofstream log(ctx.paths.Models("cpc_train_log.csv"));
  if (!log) throw DataError("train-cpc: cannot write the training log");
  log << "epoch,loss,accuracy\n";
  CpcTrainResult result = CpcTrain(train_w, dev_w, cc, ctx.cfg.cpc_epochs,
                                   MixSeed(ctx.cfg.seed, kSeedCpc), &log);
  CpcCheckpointMeta meta;
  meta.variant = ctx.cfg.cpc_variant;
  meta.epoch = result.best_epoch;
  meta.dev_loss = result.best_dev_loss;
  SaveCpcCheckpoint(ctx.paths.Models("cpc.ckpt").string(), result.model, meta);
}

void StageExtractCpc(StageContext &ctx) {
  RequireFile(ctx.paths.Models("cpc.ckpt"), "extract-cpc", "train-cpc");
  Manifest train = Ingest(ctx.cfg.train_dir);
  Manifest eval = Ingest(ctx.cfg.eval_dir);
  Manifest all;
  all.rows = train.rows;
  all.rows.insert(all.rows.end(), eval.rows.begin(), eval.rows.end());

  CpcModel model = LoadCpcCheckpoint(ctx.paths.Models("cpc.ckpt").string());
  // One model copy per worker slot would be needed if extraction mutated the
  // model; it does not, so all workers share it read-only.
  ExtractToArchive(all, ctx.paths.Features("cpc.ark").string(),
                   [&model](const Waveform &w) {
                     return ExtractContextFeatures(model, w);
                   });

  if (ctx.cfg.pca_dim > 0) {
    FeatureArchiveReader reader(ctx.paths.Features("cpc.ark").string());
    // PCA is fit on frame-level vectors pooled across training utterances.
    std::vector<FeatureMatrix> train_feats;
    int64_t total_rows = 0;
    for (const auto &r : train.rows) {
      train_feats.push_back(reader.Read(r.utt_id));
      total_rows += train_feats.back().Rows();
    }
    Eigen::MatrixXd pooled(total_rows, train_feats[0].Cols());
    int64_t at = 0;
    for (const auto &f : train_feats) {
      pooled.middleRows(at, f.Rows()) = f.values;
      at += f.Rows();
    }
    PcaModel pca = PcaFit(pooled, ctx.cfg.pca_dim);
    WriteContainer(ctx.paths.Models("pca.bin").string(),
                   {VecTensor("mean", pca.mean),
                    MatTensor("basis", pca.basis),
                    VecTensor("explained_ratio",
                              Eigen::VectorXd::Constant(1, pca.explained_ratio))});
    FeatureArchiveWriter writer(ctx.paths.Features("cpc_pca.ark").string());
    for (const auto &id : reader.Ids())
      writer.Write(id, PcaTransform(pca, reader.Read(id)));
    writer.Close();
  }
}

void StageFuse(StageContext &ctx) {
  std::string cpc_ark = ctx.cfg.pca_dim > 0 ? "cpc_pca.ark" : "cpc.ark";
  RequireFile(ctx.paths.Features("mfcc.ark"), "fuse", "extract-mfcc");
  RequireFile(ctx.paths.Features(cpc_ark), "fuse", "extract-cpc");
  FeatureArchiveReader mfcc(ctx.paths.Features("mfcc.ark").string());
  FeatureArchiveReader cpc(ctx.paths.Features(cpc_ark).string());
  FeatureArchiveWriter writer(ctx.paths.Features("fused.ark").string());
  for (const auto &id : mfcc.Ids()) {
    if (!cpc.Contains(id))
      throw DataError(StrCat("fuse: '", id, "' missing from ", cpc_ark));
    writer.Write(id, FuseConcat(mfcc.Read(id), cpc.Read(id)));
  }
  writer.Close();
}

// Stacks the train-split frames of the feature archive.
Eigen::MatrixXd TrainFrameMatrix(const PipelineConfig &cfg,
                                 const FeatureArchiveReader &reader) {
  Manifest train = Ingest(cfg.train_dir);
  std::vector<FeatureMatrix> feats;
  int64_t rows = 0;
  for (const auto &r : train.rows) {
    feats.push_back(reader.Read(r.utt_id));
    rows += feats.back().Rows();
  }
  if (feats.empty()) throw DataError("no training utterances in the archive");
  Eigen::MatrixXd pooled(rows, feats[0].Cols());
  int64_t at = 0;
  for (const auto &f : feats) {
    pooled.middleRows(at, f.Rows()) = f.values;
    at += f.Rows();
  }
  return pooled;
}

void CheckIvectorInputDim(const PipelineConfig &cfg, int dim) {
  if (cfg.summarization == "ivector" && dim > 60)
    throw ConfigError(StrCat("summarization=ivector expects feature dim <= 60 "
                             "(got ", dim, "); reduce with pca_dim"));
}

void StageTrainUbm(StageContext &ctx) {
  std::string ark = FeatureArkName(ctx.cfg);
  RequireFile(ctx.paths.Features(ark), "train-ubm",
              ctx.cfg.feature == "mfcc" ? "extract-mfcc"
              : ctx.cfg.feature == "cpc" ? "extract-cpc" : "fuse");
  FeatureArchiveReader reader(ctx.paths.Features(ark).string());
  Eigen::MatrixXd frames = TrainFrameMatrix(ctx.cfg, reader);
  CheckIvectorInputDim(ctx.cfg, static_cast<int>(frames.cols()));
  DiagGmm ubm = GmmEmTrain(frames, ctx.cfg.ubm_mixtures, ctx.cfg.ubm_iters,
                           MixSeed(ctx.cfg.seed, kSeedUbm));
  SaveUbm(ctx.paths.Models(StrCat("ubm_", ctx.cfg.feature, ".bin")).string(),
          ubm);
}

void StageTrainTv(StageContext &ctx) {
  std::string ark = FeatureArkName(ctx.cfg);
  fs::path ubm_path = ctx.paths.Models(StrCat("ubm_", ctx.cfg.feature, ".bin"));
  RequireFile(ubm_path, "train-tv", "train-ubm");
  DiagGmm ubm = LoadUbm(ubm_path.string());
  FeatureArchiveReader reader(ctx.paths.Features(ark).string());
  Manifest train = Ingest(ctx.cfg.train_dir);
  std::vector<SuffStats> stats(train.rows.size());
  ParallelFor(static_cast<int>(train.rows.size()), [&](int i) {
    stats[static_cast<size_t>(i)] = AccumulateStats(
        ubm, reader.Read(train.rows[static_cast<size_t>(i)].utt_id).values);
  });
  // Diagnostic dump of the training statistics in the archive format.
  std::vector<std::string> stat_ids;
  for (const auto &r : train.rows) stat_ids.push_back(r.utt_id);
  WriteSuffStatsArchive(
      ctx.paths.Features(StrCat("stats_", ctx.cfg.feature, ".ark")).string(),
      stat_ids, stats);
  TotalVariabilityModel tv =
      TMatrixEmTrain(stats, ubm, ctx.cfg.ivector_dim, ctx.cfg.tv_iters,
                     MixSeed(ctx.cfg.seed, kSeedTv));
  SaveTv(ctx.paths.Models(StrCat("tv_", ctx.cfg.feature, ".bin")).string(), tv);
}

void StageExtractIvectors(StageContext &ctx) {
  std::string ark = FeatureArkName(ctx.cfg);
  fs::path tv_path = ctx.paths.Models(StrCat("tv_", ctx.cfg.feature, ".bin"));
  RequireFile(tv_path, "extract-ivectors", "train-tv");
  TotalVariabilityModel tv = LoadTv(tv_path.string());
  FeatureArchiveReader reader(ctx.paths.Features(ark).string());
  Manifest train = Ingest(ctx.cfg.train_dir);
  Manifest eval = Ingest(ctx.cfg.eval_dir);
  std::vector<std::string> order;
  for (const auto &r : train.rows) order.push_back(r.utt_id);
  for (const auto &r : eval.rows) order.push_back(r.utt_id);

  std::vector<Eigen::VectorXd> ivecs(order.size());
  ParallelFor(static_cast<int>(order.size()), [&](int i) {
    SuffStats st =
        AccumulateStats(tv.ubm, reader.Read(order[static_cast<size_t>(i)]).values);
    ivecs[static_cast<size_t>(i)] = ExtractIvector(tv, st);
  });
  EmbeddingSet set;
  for (size_t i = 0; i < order.size(); i++) {
    set.entries[order[i]] = ivecs[i];
    std::string speaker;
    ParseUttId(order[i], &speaker, nullptr, nullptr);
    set.labels[order[i]] = speaker;
  }
  SaveEmbeddings(ctx.paths.Embeddings(EmbeddingArkName(ctx.cfg)).string(), set,
                 order);
}

void StagePool(StageContext &ctx) {
  std::string ark = FeatureArkName(ctx.cfg);
  RequireFile(ctx.paths.Features(ark), "pool",
              ctx.cfg.feature == "mfcc" ? "extract-mfcc"
              : ctx.cfg.feature == "cpc" ? "extract-cpc" : "fuse");
  FeatureArchiveReader reader(ctx.paths.Features(ark).string());
  Manifest train = Ingest(ctx.cfg.train_dir);
  Manifest eval = Ingest(ctx.cfg.eval_dir);
  std::vector<std::string> order;
  for (const auto &r : train.rows) order.push_back(r.utt_id);
  for (const auto &r : eval.rows) order.push_back(r.utt_id);
  EmbeddingSet set;
  for (const auto &id : order) {
    set.entries[id] = AveragePool(reader.Read(id));
    std::string speaker;
    ParseUttId(id, &speaker, nullptr, nullptr);
    set.labels[id] = speaker;
  }
  SaveEmbeddings(ctx.paths.Embeddings(EmbeddingArkName(ctx.cfg)).string(), set,
                 order);
}

void StageTrainBackend(StageContext &ctx) {
  fs::path emb_path = ctx.paths.Embeddings(EmbeddingArkName(ctx.cfg));
  RequireFile(emb_path, "train-backend",
              ctx.cfg.summarization == "pool" ? "pool" : "extract-ivectors");
  EmbeddingSet all = LoadEmbeddings(emb_path.string());
  Manifest train = Ingest(ctx.cfg.train_dir);
  EmbeddingSet train_set;
  for (const auto &r : train.rows) {
    auto it = all.entries.find(r.utt_id);
    if (it == all.entries.end())
      throw DataError(StrCat("train-backend: embedding missing for ",
                             r.utt_id));
    train_set.entries[r.utt_id] = it->second;
    train_set.labels[r.utt_id] = all.labels.at(r.utt_id);
  }

  BackendModel backend;
  backend.mean = Eigen::VectorXd::Zero(train_set.Dim());
  for (const auto &[id, v] : train_set.entries) backend.mean += v;
  backend.mean /= static_cast<double>(train_set.entries.size());

  EmbeddingSet normalized = MeanLengthNormalize(train_set, &backend.mean);
  backend.lda = LdaFit(normalized, ctx.cfg.lda_dim);
  EmbeddingSet projected = LdaTransform(backend.lda, normalized);
  backend.plda = PldaFit(projected, ctx.cfg.plda_iters);
  SaveBackend(ctx.paths.Models(BackendName(ctx.cfg)).string(), backend);
}

void StageScore(StageContext &ctx) {
  fs::path backend_path = ctx.paths.Models(BackendName(ctx.cfg));
  fs::path emb_path = ctx.paths.Embeddings(EmbeddingArkName(ctx.cfg));
  RequireFile(backend_path, "score", "train-backend");
  RequireFile(emb_path, "score", "train-backend");
  BackendModel backend = LoadBackend(backend_path.string());
  EmbeddingSet all = LoadEmbeddings(emb_path.string());

  Manifest eval = Ingest(ctx.cfg.eval_dir);
  std::vector<TrialUtterance> utts;
  for (const auto &r : eval.rows)
    utts.push_back({r.utt_id, r.speaker, r.chapter});
  TrialList trials = GenerateTrials(utts, ctx.cfg.protocol,
                                    MixSeed(ctx.cfg.seed, kSeedTrials));

  // Project the eval embeddings with the training statistics.
  EmbeddingSet eval_set;
  for (const auto &r : eval.rows) {
    auto it = all.entries.find(r.utt_id);
    if (it == all.entries.end())
      throw DataError(StrCat("score: embedding missing for ", r.utt_id));
    eval_set.entries[r.utt_id] = it->second;
    eval_set.labels[r.utt_id] = all.labels.at(r.utt_id);
  }
  EmbeddingSet projected =
      LdaTransform(backend.lda, MeanLengthNormalize(eval_set, &backend.mean));

  ScoreSet scores;
  scores.trials = trials;
  scores.scores.reserve(trials.size());
  for (const auto &t : trials)
    scores.scores.push_back(PldaLlr(backend.plda,
                                    projected.entries.at(t.enroll_id),
                                    projected.entries.at(t.test_id)));

  fs::path exp = fs::path(ExperimentDir(ctx.cfg, ctx.paths.work.string()));
  fs::create_directories(exp);
  WriteTrialList((exp / "trials.txt").string(), trials);
  WriteScores((exp / "scores.txt").string(), scores);
}

void StageEval(StageContext &ctx) {
  fs::path exp = fs::path(ExperimentDir(ctx.cfg, ctx.paths.work.string()));
  RequireFile(exp / "trials.txt", "eval", "score");
  RequireFile(exp / "scores.txt", "eval", "score");
  TrialList trials = ReadTrialList((exp / "trials.txt").string());
  ScoreSet scores = ReadScores((exp / "scores.txt").string(), trials);

  double eer = ComputeEer(scores);
  DcfParams dp{ctx.cfg.dcf_c_frr, ctx.cfg.dcf_c_far, ctx.cfg.dcf_p_target};
  DcfResult dcf = ComputeDcf(scores, dp);
  std::vector<DetPoint> det = ComputeDet(scores);
  WriteDetCsv((exp / "det.csv").string(), det);

  size_t targets = 0;
  for (const auto &t : trials)
    if (t.target) targets++;
  std::ofstream os(exp / "metrics.txt");
  if (!os) throw DataError("eval: cannot write metrics.txt");
  char buf[64];
  os << "trials " << trials.size() << "\n";
  os << "targets " << targets << "\n";
  std::snprintf(buf, sizeof(buf), "%.12g", eer);
  os << "eer " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.12g", dcf.min_value);
  os << "min_dcf " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.12g", dcf.argmin_threshold);
  os << "dcf_threshold " << buf << "\n";
}

void StagePlot(StageContext &ctx) {
  fs::path exp = fs::path(ExperimentDir(ctx.cfg, ctx.paths.work.string()));
  RequireFile(exp / "det.csv", "plot", "eval");
  RequireFile(exp / "metrics.txt", "plot", "eval");
  std::vector<DetPoint> det = ReadDetCsv((exp / "det.csv").string());
  DetCurve curve;
  curve.label = StrCat(ctx.cfg.feature, "-", ctx.cfg.summarization);
  curve.points = det;
  curve.eer = ReadEerFromMetrics((exp / "metrics.txt").string());
  PlotDetSvg((exp / "det.svg").string(), {curve});

  // Heatmap of the first eval utterance's features.
  std::string ark = FeatureArkName(ctx.cfg);
  RequireFile(ctx.paths.Features(ark), "plot", "the feature extraction");
  FeatureArchiveReader reader(ctx.paths.Features(ark).string());
  Manifest eval = Ingest(ctx.cfg.eval_dir);
  FeatureMatrix f = reader.Read(eval.rows.front().utt_id);
  PlotFeatureHeatmap((exp / "heatmap.pgm").string(),
                     (exp / "heatmap.csv").string(), f);
}

// ---- stage table -------------------------------------------------------------------

std::vector<std::string> InputWavs(const PipelineConfig &cfg, bool train,
                                   bool dev, bool eval) {
  std::vector<std::string> files;
  auto add = [&files](const std::string &dir) {
    Manifest m = Ingest(dir);
    for (auto &p : WavPaths(m)) files.push_back(p);
  };
  if (train) add(cfg.train_dir);
  if (dev) add(cfg.dev_dir);
  if (eval) add(cfg.eval_dir);
  return files;
}

StageSpec BuildSpec(const std::string &stage, const PipelineConfig &cfg,
                    const Paths &paths) {
  StageSpec spec;
  std::ostringstream params;
  auto exp = fs::path(ExperimentDir(cfg, paths.work.string()));

  if (stage == "extract-mfcc") {
    spec.key = stage;
    params << "deltas=" << cfg.mfcc_deltas << " order=" << cfg.mfcc_delta_order
           << " train=" << cfg.train_dir << " eval=" << cfg.eval_dir;
    spec.inputs = InputWavs(cfg, true, false, true);
    spec.outputs = {paths.Features("mfcc.ark").string(),
                    paths.Features("mfcc.ark.idx").string()};
  } else if (stage == "train-cpc") {
    spec.key = stage;
    CpcConfig cc = BuildCpcConfig(cfg);
    params << "variant=" << cfg.cpc_variant << " ch=" << cc.encoder_channels
           << " hid=" << cc.ar_hidden << " layers=" << cc.ar_layers
           << " k=" << cc.prediction_steps << " batch=" << cc.batch
           << " crop=" << cc.crop << " lr=" << cc.learning_rate
           << " crops=" << cc.crops_per_utt << " epochs=" << cfg.cpc_epochs
           << " seed=" << cfg.seed << " train=" << cfg.train_dir
           << " dev=" << cfg.dev_dir;
    spec.inputs = InputWavs(cfg, true, true, false);
    spec.outputs = {paths.Models("cpc.ckpt").string(),
                    paths.Models("cpc.ckpt.meta").string(),
                    paths.Models("cpc_train_log.csv").string()};
  } else if (stage == "extract-cpc") {
    spec.key = stage;
    params << "pca=" << cfg.pca_dim << " train=" << cfg.train_dir
           << " eval=" << cfg.eval_dir;
    spec.inputs = InputWavs(cfg, true, false, true);
    if (fs::exists(paths.Models("cpc.ckpt")))
      spec.inputs.push_back(paths.Models("cpc.ckpt").string());
    spec.outputs = {paths.Features("cpc.ark").string(),
                    paths.Features("cpc.ark.idx").string()};
    if (cfg.pca_dim > 0) {
      spec.outputs.push_back(paths.Features("cpc_pca.ark").string());
      spec.outputs.push_back(paths.Features("cpc_pca.ark.idx").string());
      spec.outputs.push_back(paths.Models("pca.bin").string());
    }
  } else if (stage == "fuse") {
    spec.key = stage;
    params << "pca=" << cfg.pca_dim;
    std::string cpc_ark = cfg.pca_dim > 0 ? "cpc_pca.ark" : "cpc.ark";
    if (fs::exists(paths.Features("mfcc.ark")))
      spec.inputs.push_back(paths.Features("mfcc.ark").string());
    if (fs::exists(paths.Features(cpc_ark)))
      spec.inputs.push_back(paths.Features(cpc_ark).string());
    spec.outputs = {paths.Features("fused.ark").string(),
                    paths.Features("fused.ark.idx").string()};
  } else if (stage == "train-ubm") {
    spec.key = StrCat(stage, "_", cfg.feature);
    params << "mixtures=" << cfg.ubm_mixtures << " iters=" << cfg.ubm_iters
           << " seed=" << cfg.seed << " train=" << cfg.train_dir;
    if (fs::exists(paths.Features(FeatureArkName(cfg))))
      spec.inputs.push_back(paths.Features(FeatureArkName(cfg)).string());
    spec.outputs = {paths.Models(StrCat("ubm_", cfg.feature, ".bin")).string()};
  } else if (stage == "train-tv") {
    spec.key = StrCat(stage, "_", cfg.feature);
    params << "rank=" << cfg.ivector_dim << " iters=" << cfg.tv_iters
           << " seed=" << cfg.seed << " train=" << cfg.train_dir;
    if (fs::exists(paths.Features(FeatureArkName(cfg))))
      spec.inputs.push_back(paths.Features(FeatureArkName(cfg)).string());
    if (fs::exists(paths.Models(StrCat("ubm_", cfg.feature, ".bin"))))
      spec.inputs.push_back(
          paths.Models(StrCat("ubm_", cfg.feature, ".bin")).string());
    spec.outputs = {paths.Models(StrCat("tv_", cfg.feature, ".bin")).string(),
                    paths.Features(StrCat("stats_", cfg.feature, ".ark")).string(),
                    paths.Features(StrCat("stats_", cfg.feature, ".ark.idx")).string()};
  } else if (stage == "extract-ivectors") {
    spec.key = StrCat(stage, "_", cfg.feature);
    params << "train=" << cfg.train_dir << " eval=" << cfg.eval_dir;
    if (fs::exists(paths.Features(FeatureArkName(cfg))))
      spec.inputs.push_back(paths.Features(FeatureArkName(cfg)).string());
    if (fs::exists(paths.Models(StrCat("tv_", cfg.feature, ".bin"))))
      spec.inputs.push_back(
          paths.Models(StrCat("tv_", cfg.feature, ".bin")).string());
    spec.outputs = {paths.Embeddings(EmbeddingArkName(cfg)).string(),
                    StrCat(paths.Embeddings(EmbeddingArkName(cfg)).string(),
                           ".idx")};
  } else if (stage == "pool") {
    spec.key = StrCat(stage, "_", cfg.feature);
    params << "train=" << cfg.train_dir << " eval=" << cfg.eval_dir;
    if (fs::exists(paths.Features(FeatureArkName(cfg))))
      spec.inputs.push_back(paths.Features(FeatureArkName(cfg)).string());
    spec.outputs = {paths.Embeddings(EmbeddingArkName(cfg)).string(),
                    StrCat(paths.Embeddings(EmbeddingArkName(cfg)).string(),
                           ".idx")};
  } else if (stage == "train-backend") {
    spec.key = StrCat(stage, "_", cfg.feature, "_", cfg.summarization);
    params << "lda=" << cfg.lda_dim << " plda_iters=" << cfg.plda_iters
           << " train=" << cfg.train_dir;
    if (fs::exists(paths.Embeddings(EmbeddingArkName(cfg))))
      spec.inputs.push_back(paths.Embeddings(EmbeddingArkName(cfg)).string());
    spec.outputs = {paths.Models(BackendName(cfg)).string()};
  } else if (stage == "score") {
    spec.key = StrCat(stage, "_", ExpTag(cfg));
    params << "protocol=" << cfg.protocol << " seed=" << cfg.seed
           << " eval=" << cfg.eval_dir;
    if (fs::exists(paths.Models(BackendName(cfg))))
      spec.inputs.push_back(paths.Models(BackendName(cfg)).string());
    if (fs::exists(paths.Embeddings(EmbeddingArkName(cfg))))
      spec.inputs.push_back(paths.Embeddings(EmbeddingArkName(cfg)).string());
    spec.outputs = {(exp / "trials.txt").string(),
                    (exp / "scores.txt").string()};
  } else if (stage == "eval") {
    spec.key = StrCat(stage, "_", ExpTag(cfg));
    params << "c_frr=" << cfg.dcf_c_frr << " c_far=" << cfg.dcf_c_far
           << " p_target=" << cfg.dcf_p_target;
    if (fs::exists(exp / "trials.txt"))
      spec.inputs.push_back((exp / "trials.txt").string());
    if (fs::exists(exp / "scores.txt"))
      spec.inputs.push_back((exp / "scores.txt").string());
    spec.outputs = {(exp / "metrics.txt").string(), (exp / "det.csv").string()};
  } else if (stage == "plot") {
    spec.key = StrCat(stage, "_", ExpTag(cfg));
    params << "eval=" << cfg.eval_dir;
    if (fs::exists(exp / "det.csv"))
      spec.inputs.push_back((exp / "det.csv").string());
    if (fs::exists(exp / "metrics.txt"))
      spec.inputs.push_back((exp / "metrics.txt").string());
    if (fs::exists(paths.Features(FeatureArkName(cfg))))
      spec.inputs.push_back(paths.Features(FeatureArkName(cfg)).string());
    spec.outputs = {(exp / "det.svg").string(), (exp / "heatmap.pgm").string(),
                    (exp / "heatmap.csv").string()};
  } else {
    throw ConfigError(StrCat("unknown stage '", stage, "'"));
  }
  spec.params = params.str();
  return spec;
}

}  // namespace

std::string ExperimentDir(const PipelineConfig &cfg,
                          const std::string &workdir) {
  return (fs::path(workdir) / "exp" / ExpTag(cfg)).string();
}

double ReadEerFromMetrics(const std::string &metrics_path) {
  std::ifstream is(metrics_path);
  if (!is) throw DataError(StrCat("cannot read metrics: ", metrics_path));
  std::string key;
  double value;
  while (is >> key >> value)
    if (key == "eer") return value;
  throw FormatError(StrCat("no eer line in ", metrics_path));
}

StageResult RunStage(const std::string &stage, const PipelineConfig &cfg,
                     const std::string &workdir) {
  cfg.Validate();
  if (workdir.empty()) throw ConfigError("run: workdir must not be empty");
  Paths paths(workdir);
  fs::create_directories(paths.work / "features");
  fs::create_directories(paths.work / "models");
  fs::create_directories(paths.work / "embeddings");
  fs::create_directories(paths.work / "receipts");

  StageSpec spec = BuildSpec(stage, cfg, paths);
  StageResult result;
  result.stage = stage;
  result.outputs = spec.outputs;
  if (ReceiptMatches(paths, spec)) {
    result.skipped = true;
    return result;
  }

  auto start = std::chrono::steady_clock::now();
  StageContext ctx{cfg, paths, spec};
  if (stage == "extract-mfcc") StageExtractMfcc(ctx);
  else if (stage == "train-cpc") StageTrainCpc(ctx);
  else if (stage == "extract-cpc") StageExtractCpc(ctx);
  else if (stage == "fuse") StageFuse(ctx);
  else if (stage == "train-ubm") StageTrainUbm(ctx);
  else if (stage == "train-tv") StageTrainTv(ctx);
  else if (stage == "extract-ivectors") StageExtractIvectors(ctx);
  else if (stage == "pool") StagePool(ctx);
  else if (stage == "train-backend") StageTrainBackend(ctx);
  else if (stage == "score") StageScore(ctx);
  else if (stage == "eval") StageEval(ctx);
  else if (stage == "plot") StagePlot(ctx);
  else throw ConfigError(StrCat("unknown stage '", stage, "'"));
  auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();

  // Inputs may exist only now (prerequisites produced during this process
  // run are listed lazily): rebuild the spec so the receipt records them.
  StageSpec final_spec = BuildSpec(stage, cfg, paths);
  WriteReceipt(paths, final_spec, wall);
  return result;
}

std::vector<std::string> StageSequence(const PipelineConfig &cfg) {
  cfg.Validate();
  std::vector<std::string> stages;
  bool needs_mfcc = cfg.feature == "mfcc" || cfg.feature == "fused";
  bool needs_cpc = cfg.feature == "cpc" || cfg.feature == "fused";
  if (needs_mfcc) stages.push_back("extract-mfcc");
  if (needs_cpc) {
    stages.push_back("train-cpc");
    stages.push_back("extract-cpc");
  }
  if (cfg.feature == "fused") stages.push_back("fuse");
  if (cfg.summarization == "ivector") {
    stages.push_back("train-ubm");
    stages.push_back("train-tv");
    stages.push_back("extract-ivectors");
  } else {
    stages.push_back("pool");
  }
  stages.push_back("train-backend");
  stages.push_back("score");
  stages.push_back("eval");
  stages.push_back("plot");
  return stages;
}

std::vector<StageResult> RunPipeline(const PipelineConfig &cfg,
                                     const std::string &workdir) {
  std::vector<StageResult> results;
  for (const auto &stage : StageSequence(cfg))
    results.push_back(RunStage(stage, cfg, workdir));
  return results;
}

}  // namespace cpcv
