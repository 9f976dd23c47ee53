// core/include/cpcv/features.h

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

#ifndef CPCV_FEATURES_H_
#define CPCV_FEATURES_H_

#include <Eigen/Dense>
#include <cstdint>

#include "cpcv/common.h"

namespace cpcv {

enum class FeatureKind : uint8_t {
  kMfcc = 0,
  kCpc = 1,
  kFused = 2,
  // Internal extensions reusing the archive record layout.
  kEmbedding = 3,
  kStats = 4,
};

const char *FeatureKindName(FeatureKind k);

// Frame-level features: one row per frame.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // rows = frames, cols = feature dim
  FeatureKind kind = FeatureKind::kMfcc;
  double frame_shift_ms = 10.0;

  int Rows() const { return static_cast<int>(values.rows()); }
  int Cols() const { return static_cast<int>(values.cols()); }
};

// Column-wise truncation to the shorter of the two inputs, then column
// concatenation (a's columns first). Frame shifts must agree.
FeatureMatrix FuseConcat(const FeatureMatrix &a, const FeatureMatrix &b);

}  // namespace cpcv

#endif  // CPCV_FEATURES_H_
