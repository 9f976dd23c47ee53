// core/include/cpcv/plots.h

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

#ifndef CPCV_PLOTS_H_
#define CPCV_PLOTS_H_

#include <string>
#include <vector>

#include "cpcv/features.h"
#include "cpcv/metrics.h"

namespace cpcv {

struct DetCurve {
  std::string label;
  std::vector<DetPoint> points;
  double eer = -1.0;  // EER marker position on the curve when >= 0
};

// Probit-probit DET plot with percent ticks from 0.1 to 50; one polyline per
// curve plus a legend and EER markers. Byte output is deterministic for a
// given input.
void PlotDetSvg(const std::string &path, const std::vector<DetCurve> &curves);

// Per-dimension min-max scaled heatmap, time along x. The PGM is rows
// (frames) wide and dims tall; the CSV lists per-dimension temporal variance
// and its ratio to the largest one.
void PlotFeatureHeatmap(const std::string &pgm_path,
                        const std::string &csv_path, const FeatureMatrix &f);

}  // namespace cpcv

#endif  // CPCV_PLOTS_H_
