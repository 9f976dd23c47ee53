// core/src/features.cc

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

#include "cpcv/features.h"

#include <algorithm>

namespace cpcv {

const char *FeatureKindName(FeatureKind k) {
  switch (k) {
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kCpc: return "cpc";
    case FeatureKind::kFused: return "fused";
    case FeatureKind::kEmbedding: return "embedding";
    case FeatureKind::kStats: return "stats";
  }
  return "unknown";
}

FeatureMatrix FuseConcat(const FeatureMatrix &a, const FeatureMatrix &b) {
  if (a.frame_shift_ms != b.frame_shift_ms)
    throw DimensionError(StrCat("fuse_concat: frame shifts disagree: ",
                                a.frame_shift_ms, " ms vs ", b.frame_shift_ms,
                                " ms"));
  int rows = std::min(a.Rows(), b.Rows());
  if (rows < 1) throw DataError("fuse_concat: empty input");
  FeatureMatrix out;
  out.kind = FeatureKind::kFused;
  out.frame_shift_ms = a.frame_shift_ms;
  out.values.resize(rows, a.Cols() + b.Cols());
  out.values << a.values.topRows(rows), b.values.topRows(rows);
  return out;
}

}  // namespace cpcv
