// core/src/stats_io.cc

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

#include "cpcv/stats_io.h"

#include <cmath>

#include "cpcv/feature_archive.h"

namespace cpcv {

void WriteSuffStatsArchive(const std::string &path,
                           const std::vector<std::string> &ids,
                           const std::vector<SuffStats> &stats) {
  if (ids.size() != stats.size())
    throw ContractError("stats archive: ids/stats size mismatch");
  FeatureArchiveWriter writer(path);
  for (size_t i = 0; i < ids.size(); i++) {
    const SuffStats &st = stats[i];
    FeatureMatrix rec;
    rec.kind = FeatureKind::kStats;
    rec.values.resize(st.n.size(), st.f.cols() + 1);
    rec.values.col(0) = st.n;
    rec.values.rightCols(st.f.cols()) = st.f;
    writer.Write(ids[i], rec);
  }
  writer.Close();
}

std::vector<SuffStats> ReadSuffStatsArchive(const std::string &path,
                                            std::vector<std::string> *ids) {
  FeatureArchiveReader reader(path);
  std::vector<SuffStats> out;
  for (const auto &id : reader.Ids()) {
    FeatureMatrix rec = reader.Read(id);
    if (rec.kind != FeatureKind::kStats || rec.Cols() < 2)
      throw FormatError(StrCat("stats archive: record '", id,
                               "' does not carry statistics"));
    SuffStats st;
    st.n = rec.values.col(0);
    st.f = rec.values.rightCols(rec.Cols() - 1);
    st.num_frames = static_cast<int64_t>(std::llround(st.n.sum()));
    out.push_back(std::move(st));
    if (ids != nullptr) ids->push_back(id);
  }
  return out;
}

}  // namespace cpcv
