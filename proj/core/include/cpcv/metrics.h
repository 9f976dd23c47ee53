// core/include/cpcv/metrics.h

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

#ifndef CPCV_METRICS_H_
#define CPCV_METRICS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace cpcv {

struct Trial {
  std::string enroll_id;
  std::string test_id;
  bool target = false;
};

using TrialList = std::vector<Trial>;

// Parallel arrays of trials and scalar scores.
struct ScoreSet {
  TrialList trials;
  std::vector<double> scores;

  void Validate() const;  // finite scores, both classes present
};

struct DcfParams {
  double c_frr = 10.0;
  double c_far = 1.0;
  double p_target = 0.01;
};

// One row of a corpus manifest as needed for trial generation.
struct TrialUtterance {
  std::string utt_id;
  std::string speaker;
  std::string chapter;
};

// Protocol 1: seeded shuffle, first half enrolls, second half tests, full
// cross product, label = speaker equality. Protocol 2: each speaker's
// chapters are split disjointly between the two halves, so no trial pairs
// recordings of the same speaker and chapter; single-chapter speakers are
// warned about and contribute nontarget trials only.
TrialList GenerateTrials(const std::vector<TrialUtterance> &utts, int protocol,
                         uint64_t seed);

// Operating point of the detector at one threshold.
struct OperatingPoint {
  double threshold;
  double far;  // P(nontarget score >= threshold)
  double frr;  // P(target score < threshold)
};

// Threshold sweep over all distinct scores plus one point beyond the maximum.
// FAR is non-increasing and FRR non-decreasing along the sweep.
std::vector<OperatingPoint> SweepOperatingPoints(const ScoreSet &s);

// Equal error rate, linearly interpolated between the two operating points
// bracketing the FAR/FRR crossing.
double ComputeEer(const ScoreSet &s);

struct DetPoint {
  double far, frr;
  double probit_far, probit_frr;
};

// One DET point per sweep threshold; probabilities are clamped to
// [1e-6, 1-1e-6] before the probit warp.
std::vector<DetPoint> ComputeDet(const ScoreSet &s);

struct DcfResult {
  double min_value;
  double argmin_threshold;
};

// C(t) = c_frr*p_target*FRR(t) + c_far*(1-p_target)*FAR(t), minimized over
// the sweep.
DcfResult ComputeDcf(const ScoreSet &s, const DcfParams &p);

// Inverse standard normal CDF (rational approximation, ~1e-9 accuracy,
// constants frozen here for bit-stable DET output).
double Probit(double p);

// "enrollID testID target|nontarget" lines.
void WriteTrialList(const std::string &path, const TrialList &trials);
TrialList ReadTrialList(const std::string &path);

// "enrollID testID score" lines.
void WriteScores(const std::string &path, const ScoreSet &s);
ScoreSet ReadScores(const std::string &path, const TrialList &trials);

// CSV "far,frr,probit_far,probit_frr".
void WriteDetCsv(const std::string &path, const std::vector<DetPoint> &det);
std::vector<DetPoint> ReadDetCsv(const std::string &path);

// Splits "speaker-chapter-segment"; throws FormatError when unparsable.
void ParseUttId(const std::string &utt_id, std::string *speaker,
                std::string *chapter, std::string *segment);

}  // namespace cpcv

#endif  // CPCV_METRICS_H_
