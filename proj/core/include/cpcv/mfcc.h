// core/include/cpcv/mfcc.h

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

#ifndef CPCV_MFCC_H_
#define CPCV_MFCC_H_

#include <Eigen/Dense>

#include "cpcv/audio.h"
#include "cpcv/features.h"

namespace cpcv {

// Front-end configuration. Window is Hamming, pre-emphasis 0.97, FFT size 512
// (next power of two above the 400-sample frame), log floor 1e-10; c0 is kept.
struct FeatureConfig {
  int sample_rate = 16000;
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  int num_mel = 40;
  double low_cut_hz = 20.0;
  double high_cut_hz = 7600.0;
  int num_ceps = 24;

  int FrameLengthSamples() const {
    return static_cast<int>(frame_length_ms * sample_rate / 1000.0 + 0.5);
  }
  int FrameShiftSamples() const {
    return static_cast<int>(frame_shift_ms * sample_rate / 1000.0 + 0.5);
  }
  void Validate() const;
};

constexpr int kFftSize = 512;
constexpr int kNumFftBins = kFftSize / 2 + 1;  // non-negative frequencies
constexpr double kPreemphasis = 0.97;
constexpr double kLogFloor = 1e-10;

// mel(f) = 1127 * ln(1 + f/700)
double MelScale(double hz);
double InverseMelScale(double mel);

// Frame count for a signal of n samples: 1 + floor((n - flen)/fshift); edges
// are snipped, never padded. Throws when n < flen.
int NumFrames(int64_t n, const FeatureConfig &cfg);

// Per frame: DC removal, pre-emphasis, Hamming window. [frames x flen]
Eigen::MatrixXd FrameSignal(const Waveform &w, const FeatureConfig &cfg);

// Magnitude-squared spectrum of each frame, bins 0..256. [frames x 257]
Eigen::MatrixXd StftPower(const Eigen::MatrixXd &frames);

// Triangular filters with centers uniform on the mel scale. [num_mel x 257]
struct MelFilterbank {
  Eigen::MatrixXd weights;
};
MelFilterbank MakeMelFilterbank(const FeatureConfig &cfg);

// Orthonormal DCT-II matrix, [num_ceps x num_mel].
Eigen::MatrixXd DctMatrix(int num_ceps, int num_mel);

// Full front end: framing, power spectrum, mel, log (floored), DCT.
FeatureMatrix ComputeMfcc(const Waveform &w, const FeatureConfig &cfg);

// Regression deltas over a +/-2 frame window with edge replication.
// order 1 doubles the dimension, order 2 triples it. Needs >= 5 rows.
FeatureMatrix AppendDeltas(const FeatureMatrix &f, int order);

}  // namespace cpcv

#endif  // CPCV_MFCC_H_
