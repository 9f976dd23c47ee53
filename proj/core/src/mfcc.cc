// core/src/mfcc.cc

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

#include "cpcv/mfcc.h"

#include <cmath>

#include "cpcv/common.h"
#include "fft.h"

namespace cpcv {

void FftPow2(std::vector<std::complex<double>> &a, bool inverse) {
  size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ContractError(StrCat("FftPow2: size must be a power of two, got ", n));
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; i++) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; j++) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto &x : a) x /= static_cast<double>(n);
  }
}

void FeatureConfig::Validate() const {
  if (sample_rate <= 0) throw ConfigError("FeatureConfig: sample_rate must be > 0");
  if (!(0.0 < low_cut_hz && low_cut_hz < high_cut_hz))
    throw ConfigError("FeatureConfig: need 0 < low_cut < high_cut");
  if (high_cut_hz > sample_rate / 2.0)
    throw ConfigError(StrCat("FeatureConfig: high_cut ", high_cut_hz,
                             " Hz above Nyquist ", sample_rate / 2.0, " Hz"));
  if (num_ceps > num_mel)
    throw ConfigError(StrCat("FeatureConfig: num_ceps ", num_ceps,
                             " exceeds num_mel ", num_mel));
  if (FrameLengthSamples() > kFftSize)
    throw ConfigError("FeatureConfig: frame length exceeds FFT size 512");
}

double MelScale(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

double InverseMelScale(double mel) {
  return 700.0 * (std::exp(mel / 1127.0) - 1.0);
}

int NumFrames(int64_t n, const FeatureConfig &cfg) {
  int flen = cfg.FrameLengthSamples();
  int fshift = cfg.FrameShiftSamples();
  if (n < flen)
    throw DataError(StrCat("frame_signal: input too short: ", n,
                           " samples < frame length ", flen));
  return 1 + static_cast<int>((n - flen) / fshift);
}

Eigen::MatrixXd FrameSignal(const Waveform &w, const FeatureConfig &cfg) {
  cfg.Validate();
  if (w.samples.empty()) throw DataError("frame_signal: empty waveform");
  int flen = cfg.FrameLengthSamples();
  int fshift = cfg.FrameShiftSamples();
  int nf = NumFrames(static_cast<int64_t>(w.samples.size()), cfg);

  Eigen::VectorXd window(flen);
  for (int i = 0; i < flen; i++)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (flen - 1));

  Eigen::MatrixXd frames(nf, flen);
  std::vector<double> buf(flen);
  for (int f = 0; f < nf; f++) {
    const double *src = w.samples.data() + static_cast<int64_t>(f) * fshift;
    double mean = 0.0;
    for (int i = 0; i < flen; i++) mean += src[i];
    mean /= flen;
    for (int i = 0; i < flen; i++) buf[i] = src[i] - mean;
    // Pre-emphasis inside the frame, first sample against itself.
    for (int i = flen - 1; i > 0; i--) buf[i] -= kPreemphasis * buf[i - 1];
    buf[0] -= kPreemphasis * buf[0];
    for (int i = 0; i < flen; i++) frames(f, i) = buf[i] * window[i];
  }
  return frames;
}

Eigen::MatrixXd StftPower(const Eigen::MatrixXd &frames) {
  int nf = static_cast<int>(frames.rows());
  int flen = static_cast<int>(frames.cols());
  if (flen > kFftSize)
    throw DimensionError(StrCat("stft_power: frame length ", flen,
                                " exceeds FFT size ", kFftSize));
  Eigen::MatrixXd power(nf, kNumFftBins);
  std::vector<std::complex<double>> a(kFftSize);
  for (int f = 0; f < nf; f++) {
    for (int i = 0; i < kFftSize; i++)
      a[i] = i < flen ? std::complex<double>(frames(f, i), 0.0)
                      : std::complex<double>(0.0, 0.0);
    FftPow2(a);
    for (int k = 0; k < kNumFftBins; k++) power(f, k) = std::norm(a[k]);
  }
  return power;
}

MelFilterbank MakeMelFilterbank(const FeatureConfig &cfg) {
  cfg.Validate();
  int m = cfg.num_mel;
  double mel_lo = MelScale(cfg.low_cut_hz);
  double mel_hi = MelScale(cfg.high_cut_hz);
  // m+2 equally spaced mel points; filter i peaks at point i+1.
  Eigen::VectorXd edges(m + 2);
  for (int i = 0; i < m + 2; i++)
    edges[i] = mel_lo + (mel_hi - mel_lo) * i / (m + 1);

  MelFilterbank fb;
  fb.weights = Eigen::MatrixXd::Zero(m, kNumFftBins);
  double bin_hz = static_cast<double>(cfg.sample_rate) / kFftSize;
  for (int k = 0; k < kNumFftBins; k++) {
    double mel_k = MelScale(k * bin_hz);
    for (int i = 0; i < m; i++) {
      double left = edges[i], center = edges[i + 1], right = edges[i + 2];
      if (mel_k > left && mel_k < right) {
        double wgt = mel_k <= center ? (mel_k - left) / (center - left)
                                     : (right - mel_k) / (right - center);
        fb.weights(i, k) = wgt;
      }
    }
  }
  return fb;
}

Eigen::MatrixXd DctMatrix(int num_ceps, int num_mel) {
  Eigen::MatrixXd dct(num_ceps, num_mel);
  double norm0 = std::sqrt(1.0 / num_mel);
  double norm = std::sqrt(2.0 / num_mel);
  for (int j = 0; j < num_ceps; j++)
    for (int n = 0; n < num_mel; n++)
      dct(j, n) = (j == 0 ? norm0 : norm) *
                  std::cos(M_PI / num_mel * (n + 0.5) * j);
  return dct;
}

FeatureMatrix ComputeMfcc(const Waveform &w, const FeatureConfig &cfg) {
  cfg.Validate();
  if (w.sample_rate != cfg.sample_rate)
    throw ConfigError(StrCat("compute_mfcc: waveform rate ", w.sample_rate,
                             " does not match configured rate ",
                             cfg.sample_rate));
  Eigen::MatrixXd frames = FrameSignal(w, cfg);
  Eigen::MatrixXd power = StftPower(frames);
  MelFilterbank fb = MakeMelFilterbank(cfg);
  Eigen::MatrixXd mel = power * fb.weights.transpose();  // [frames x num_mel]
  Eigen::MatrixXd logmel =
      mel.cwiseMax(kLogFloor).array().log().matrix();
  Eigen::MatrixXd dct = DctMatrix(cfg.num_ceps, cfg.num_mel);
  FeatureMatrix out;
  out.values = logmel * dct.transpose();
  out.kind = FeatureKind::kMfcc;
  out.frame_shift_ms = cfg.frame_shift_ms;
  return out;
}

FeatureMatrix AppendDeltas(const FeatureMatrix &f, int order) {
  if (order != 1 && order != 2)
    throw ContractError(StrCat("append_deltas: order must be 1 or 2, got ",
                               order));
  int rows = f.Rows(), cols = f.Cols();
  if (rows < 5)
    throw DataError(StrCat("append_deltas: need >= 5 frames, got ", rows));

  auto deltas = [rows, cols](const Eigen::MatrixXd &x) {
    // d_t = sum_n n*(x[t+n] - x[t-n]) / (2 * sum n^2), n in {1,2},
    // with edge replication.
    Eigen::MatrixXd d(rows, cols);
    const double denom = 10.0;  // 2 * (1 + 4)
    for (int t = 0; t < rows; t++) {
      int tm1 = std::max(t - 1, 0), tm2 = std::max(t - 2, 0);
      int tp1 = std::min(t + 1, rows - 1), tp2 = std::min(t + 2, rows - 1);
      d.row(t) =
          (1.0 * (x.row(tp1) - x.row(tm1)) + 2.0 * (x.row(tp2) - x.row(tm2))) /
          denom;
    }
    return d;
  };

  Eigen::MatrixXd d1 = deltas(f.values);
  FeatureMatrix out;
  out.kind = f.kind;
  out.frame_shift_ms = f.frame_shift_ms;
  if (order == 1) {
    out.values.resize(rows, 2 * cols);
    out.values << f.values, d1;
  } else {
    Eigen::MatrixXd d2 = deltas(d1);
    out.values.resize(rows, 3 * cols);
    out.values << f.values, d1, d2;
  }
  return out;
}

}  // namespace cpcv
