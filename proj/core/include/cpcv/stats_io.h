// core/include/cpcv/stats_io.h

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

#ifndef CPCV_STATS_IO_H_
#define CPCV_STATS_IO_H_

#include <string>
#include <vector>

#include "cpcv/gmm.h"

namespace cpcv {

// Sufficient-statistics dumps reuse the feature-archive record layout with
// the stats kind tag: one record per utterance, rows = mixtures,
// cols = 1 + feature dim, column 0 holding the occupancies N_c and the rest
// the first-order sums F_c.
void WriteSuffStatsArchive(const std::string &path,
                           const std::vector<std::string> &ids,
                           const std::vector<SuffStats> &stats);

std::vector<SuffStats> ReadSuffStatsArchive(const std::string &path,
                                            std::vector<std::string> *ids);

}  // namespace cpcv

#endif  // CPCV_STATS_IO_H_
