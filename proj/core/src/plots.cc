// core/src/plots.cc

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

#include "cpcv/plots.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace cpcv {

namespace {

std::string Fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

constexpr double kTicksPct[] = {0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50};
const char *kCurveColors[] = {"#1f6fb4", "#d45500", "#2a8f2a",
                              "#a01515", "#6a4fa0", "#555555"};

}  // namespace

void PlotDetSvg(const std::string &path, const std::vector<DetCurve> &curves) {
  if (curves.empty()) throw DataError("plot_det: no curves");
  for (const auto &c : curves)
    if (c.points.empty())
      throw DataError(StrCat("plot_det: empty curve '", c.label, "'"));

  // Probit range covering 0.1%..50%.
  const double lo = Probit(0.001), hi = Probit(0.5);
  const double size = 480.0, margin = 56.0;
  auto sx = [&](double probit) {
    double clamped = std::clamp(probit, lo, hi);
    return margin + (clamped - lo) / (hi - lo) * size;
  };
  auto sy = [&](double probit) {
    double clamped = std::clamp(probit, lo, hi);
    return margin + size - (clamped - lo) / (hi - lo) * size;
  };

  std::ofstream os(path);
  if (!os) throw DataError(StrCat("plot_det: cannot write ", path));
  double w = size + 2 * margin, h = size + 2 * margin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Fmt(w)
     << "\" height=\"" << Fmt(h) << "\" viewBox=\"0 0 " << Fmt(w) << " "
     << Fmt(h) << "\">\n";
  os << "<rect x=\"" << Fmt(margin) << "\" y=\"" << Fmt(margin)
     << "\" width=\"" << Fmt(size) << "\" height=\"" << Fmt(size)
     << "\" fill=\"white\" stroke=\"black\"/>\n";

  for (double pct : kTicksPct) {
    double pr = Probit(pct / 100.0);
    std::string label = pct < 1 ? Fmt(pct).substr(0, 3) : std::to_string(
        static_cast<int>(pct));
    // Vertical grid line and x label (false alarm axis).
    os << "<line x1=\"" << Fmt(sx(pr)) << "\" y1=\"" << Fmt(margin)
       << "\" x2=\"" << Fmt(sx(pr)) << "\" y2=\"" << Fmt(margin + size)
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << Fmt(sx(pr)) << "\" y=\"" << Fmt(margin + size + 16)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << label << "</text>\n";
    // Horizontal grid line and y label (miss axis).
    os << "<line x1=\"" << Fmt(margin) << "\" y1=\"" << Fmt(sy(pr))
       << "\" x2=\"" << Fmt(margin + size) << "\" y2=\"" << Fmt(sy(pr))
       << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << Fmt(margin - 6) << "\" y=\"" << Fmt(sy(pr) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << label << "</text>\n";
  }
  os << "<text x=\"" << Fmt(margin + size / 2) << "\" y=\""
     << Fmt(margin + size + 38)
     << "\" font-size=\"13\" text-anchor=\"middle\">False Alarm probability "
        "(%)</text>\n";
  os << "<text x=\"14\" y=\"" << Fmt(margin + size / 2)
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << Fmt(margin + size / 2) << ")\">Miss probability (%)</text>\n";

  for (size_t ci = 0; ci < curves.size(); ci++) {
    const auto &c = curves[ci];
    const char *color = kCurveColors[ci % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto &p : c.points)
      os << Fmt(sx(p.probit_far)) << "," << Fmt(sy(p.probit_frr)) << " ";
    os << "\"/>\n";
    if (c.eer >= 0.0) {
      double pr = Probit(std::clamp(c.eer, 1e-6, 1.0 - 1e-6));
      os << "<circle cx=\"" << Fmt(sx(pr)) << "\" cy=\"" << Fmt(sy(pr))
         << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    }
    // Legend.
    double ly = margin + 18 + 16 * static_cast<double>(ci);
    os << "<line x1=\"" << Fmt(margin + size - 150) << "\" y1=\"" << Fmt(ly)
       << "\" x2=\"" << Fmt(margin + size - 128) << "\" y2=\"" << Fmt(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << Fmt(margin + size - 122) << "\" y=\"" << Fmt(ly + 4)
       << "\" font-size=\"11\">" << c.label << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw DataError(StrCat("plot_det: write failed: ", path));
}

void PlotFeatureHeatmap(const std::string &pgm_path,
                        const std::string &csv_path, const FeatureMatrix &f) {
  int frames = f.Rows(), dims = f.Cols();
  if (frames < 1 || dims < 1)
    throw DataError("plot_features: empty feature matrix");

  // Per-dimension min-max scaling.
  std::ofstream os(pgm_path, std::ios::binary);
  if (!os) throw DataError(StrCat("plot_features: cannot write ", pgm_path));
  os << "P5\n" << frames << " " << dims << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(frames));
  for (int d = 0; d < dims; d++) {
    double lo = f.values.col(d).minCoeff();
    double hi = f.values.col(d).maxCoeff();
    double span = hi - lo;
    for (int t = 0; t < frames; t++) {
      double v = span > 0.0 ? (f.values(t, d) - lo) / span : 0.5;
      row[static_cast<size_t>(t)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
    os.write(reinterpret_cast<const char *>(row.data()), frames);
  }
  if (!os) throw DataError(StrCat("plot_features: write failed: ", pgm_path));

  // Temporal variance per dimension, with the ratio to the largest.
  Eigen::VectorXd var(dims);
  for (int d = 0; d < dims; d++) {
    double mean = f.values.col(d).mean();
    var[d] = (f.values.col(d).array() - mean).square().sum() / frames;
  }
  double vmax = std::max(var.maxCoeff(), 1e-300);
  std::ofstream csv(csv_path);
  if (!csv) throw DataError(StrCat("plot_features: cannot write ", csv_path));
  csv << "dim,variance,ratio_to_max\n";
  char buf[96];
  for (int d = 0; d < dims; d++) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g", d, var[d],
                  var[d] / vmax);
    csv << buf << "\n";
  }
}

}  // namespace cpcv
