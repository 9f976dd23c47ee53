// core/include/cpcv/manifest.h

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

#ifndef CPCV_MANIFEST_H_
#define CPCV_MANIFEST_H_

#include <string>
#include <vector>

namespace cpcv {

struct ManifestRow {
  std::string utt_id;   // speaker-chapter-segment
  std::string speaker;
  std::string chapter;
  std::string path;     // absolute wav path
  double duration_s = 0.0;
};

struct Manifest {
  std::vector<ManifestRow> rows;
};

// Scans a speaker/chapter/*.wav tree in deterministic lexicographic order.
// Files whose stem does not parse as speaker-chapter-segment are skipped
// with a warning; duplicate utterance ids are a hard error; an empty result
// is a DataError. Durations come from the wav headers.
Manifest Ingest(const std::string &corpus_root);

void WriteManifest(const std::string &path, const Manifest &m);
Manifest ReadManifest(const std::string &path);

}  // namespace cpcv

#endif  // CPCV_MANIFEST_H_
