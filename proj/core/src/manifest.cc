// core/src/manifest.cc

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

#include "cpcv/manifest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cpcv/audio.h"
#include "cpcv/common.h"
#include "cpcv/metrics.h"

namespace fs = std::filesystem;

namespace cpcv {

Manifest Ingest(const std::string &corpus_root) {
  if (!fs::is_directory(corpus_root))
    throw DataError(StrCat("ingest: not a directory: ", corpus_root));

  std::vector<fs::path> wavs;
  for (const auto &entry : fs::recursive_directory_iterator(corpus_root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      wavs.push_back(entry.path());
  }
  std::sort(wavs.begin(), wavs.end());

  Manifest m;
  std::set<std::string> seen;
  for (const auto &p : wavs) {
    ManifestRow row;
    row.utt_id = p.stem().string();
    try {
      ParseUttId(row.utt_id, &row.speaker, &row.chapter, nullptr);
    } catch (const FormatError &e) {
      Warn(StrCat("ingest: skipping ", p.string(), ": ", e.what()));
      continue;
    }
    if (!seen.insert(row.utt_id).second)
      throw DataError(StrCat("ingest: duplicate utterance id: ", row.utt_id));
    row.path = fs::absolute(p).string();
    Waveform w = LoadWav(row.path);
    row.duration_s =
        static_cast<double>(w.samples.size()) / w.sample_rate;
    m.rows.push_back(std::move(row));
  }
  if (m.rows.empty())
    throw DataError(StrCat("ingest: no usable wav files under ", corpus_root));
  return m;
}

void WriteManifest(const std::string &path, const Manifest &m) {
  std::ofstream os(path);
  if (!os) throw DataError(StrCat("cannot write manifest: ", path));
  char buf[32];
  for (const auto &r : m.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.duration_s);
    os << r.utt_id << "\t" << r.speaker << "\t" << r.chapter << "\t" << r.path
       << "\t" << buf << "\n";
  }
}

Manifest ReadManifest(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError(StrCat("cannot read manifest: ", path));
  Manifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestRow r;
    std::string dur;
    if (!std::getline(ls, r.utt_id, '\t') ||
        !std::getline(ls, r.speaker, '\t') ||
        !std::getline(ls, r.chapter, '\t') || !std::getline(ls, r.path, '\t') ||
        !std::getline(ls, dur))
      throw FormatError(StrCat("bad manifest line: '", line, "'"));
    r.duration_s = std::stod(dur);
    m.rows.push_back(std::move(r));
  }
  if (m.rows.empty()) throw DataError(StrCat("empty manifest: ", path));
  return m;
}

}  // namespace cpcv
