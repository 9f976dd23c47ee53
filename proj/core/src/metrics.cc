// core/src/metrics.cc

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

#include "cpcv/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cpcv/common.h"
#include "cpcv/rng.h"

namespace cpcv {

void ScoreSet::Validate() const {
  if (trials.size() != scores.size())
    throw ContractError(StrCat("ScoreSet: ", trials.size(), " trials vs ",
                               scores.size(), " scores"));
  size_t targets = 0, nontargets = 0;
  for (size_t i = 0; i < trials.size(); i++) {
    if (!std::isfinite(scores[i]))
      throw NumericError(StrCat("ScoreSet: non-finite score at trial ", i));
    if (trials[i].target) targets++;
    else nontargets++;
  }
  if (targets == 0 || nontargets == 0)
    throw DataError(StrCat("ScoreSet: need both classes, got ", targets,
                           " target(s) and ", nontargets, " nontarget(s)"));
}

void ParseUttId(const std::string &utt_id, std::string *speaker,
                std::string *chapter, std::string *segment) {
  size_t p1 = utt_id.find('-');
  size_t p2 = utt_id.rfind('-');
  if (p1 == std::string::npos || p2 == p1 || p1 == 0 || p2 + 1 == utt_id.size())
    throw FormatError(StrCat("utterance id not of the form "
                             "speaker-chapter-segment: '", utt_id, "'"));
  if (speaker != nullptr) *speaker = utt_id.substr(0, p1);
  if (chapter != nullptr) *chapter = utt_id.substr(p1 + 1, p2 - p1 - 1);
  if (segment != nullptr) *segment = utt_id.substr(p2 + 1);
  if (chapter != nullptr && chapter->empty())
    throw FormatError(StrCat("utterance id has empty chapter: '", utt_id, "'"));
}

// ---- trial generation ----------------------------------------------------

namespace {

TrialList CrossProduct(const std::vector<const TrialUtterance *> &enroll,
                       const std::vector<const TrialUtterance *> &test) {
  TrialList trials;
  trials.reserve(enroll.size() * test.size());
  for (const auto *e : enroll)
    for (const auto *t : test)
      trials.push_back({e->utt_id, t->utt_id, e->speaker == t->speaker});
  return trials;
}

}  // namespace

TrialList GenerateTrials(const std::vector<TrialUtterance> &utts, int protocol,
                         uint64_t seed) {
  if (protocol != 1 && protocol != 2)
    throw ConfigError(StrCat("generate_trials: protocol must be 1 or 2, got ",
                             protocol));
  if (utts.size() < 2)
    throw DataError("generate_trials: need at least two utterances");
  Rng rng(MixSeed(seed, protocol));

  std::vector<const TrialUtterance *> enroll, test;
  if (protocol == 1) {
    std::vector<const TrialUtterance *> all;
    all.reserve(utts.size());
    for (const auto &u : utts) all.push_back(&u);
    rng.Shuffle(all);
    size_t half = (all.size() + 1) / 2;
    enroll.assign(all.begin(), all.begin() + static_cast<long>(half));
    test.assign(all.begin() + static_cast<long>(half), all.end());
  } else {
    // Per speaker, its chapters go disjointly to the two halves.
    std::map<std::string, std::map<std::string, std::vector<const TrialUtterance *>>>
        by_speaker;
    for (const auto &u : utts) by_speaker[u.speaker][u.chapter].push_back(&u);
    for (const auto &[speaker, chapters] : by_speaker) {
      std::vector<std::string> chapter_ids;
      for (const auto &[ch, _] : chapters) chapter_ids.push_back(ch);
      if (chapter_ids.size() < 2) {
        Warn(StrCat("generate_trials: speaker ", speaker,
                    " has a single chapter; it cannot form protocol-2 target "
                    "trials and contributes nontargets only"));
        auto &side = rng.UniformInt(2) == 0 ? enroll : test;
        for (const auto *u : chapters.begin()->second) side.push_back(u);
        continue;
      }
      rng.Shuffle(chapter_ids);
      size_t half = (chapter_ids.size() + 1) / 2;
      for (size_t i = 0; i < chapter_ids.size(); i++) {
        auto &side = i < half ? enroll : test;
        for (const auto *u : chapters.at(chapter_ids[i])) side.push_back(u);
      }
    }
  }

  TrialList trials = CrossProduct(enroll, test);
  if (protocol == 2) {
    // By construction no target pair shares a chapter; keep the filter as a
    // guard against malformed manifests (same chapter id under one speaker
    // split across sides cannot happen, duplicate utt ids could).
    TrialList filtered;
    filtered.reserve(trials.size());
    std::map<std::string, const TrialUtterance *> by_id;
    for (const auto &u : utts) by_id[u.utt_id] = &u;
    for (const auto &t : trials) {
      if (t.target &&
          by_id.at(t.enroll_id)->chapter == by_id.at(t.test_id)->chapter)
        continue;
      filtered.push_back(t);
    }
    trials = std::move(filtered);
  }
  return trials;
}

// ---- threshold sweep and metrics ------------------------------------------

std::vector<OperatingPoint> SweepOperatingPoints(const ScoreSet &s) {
  s.Validate();
  std::vector<double> targets, nontargets, distinct;
  distinct.reserve(s.scores.size());
  for (size_t i = 0; i < s.scores.size(); i++) {
    (s.trials[i].target ? targets : nontargets).push_back(s.scores[i]);
    distinct.push_back(s.scores[i]);
  }
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  double nt = static_cast<double>(targets.size());
  double nn = static_cast<double>(nontargets.size());
  std::vector<OperatingPoint> points;
  points.reserve(distinct.size() + 1);
  for (double t : distinct) {
    // FAR: nontargets >= t; FRR: targets < t.
    auto ge = nontargets.end() -
              std::lower_bound(nontargets.begin(), nontargets.end(), t);
    auto lt = std::lower_bound(targets.begin(), targets.end(), t) -
              targets.begin();
    points.push_back({t, static_cast<double>(ge) / nn,
                      static_cast<double>(lt) / nt});
  }
  // One more point past the maximum score: everything rejected.
  points.push_back({distinct.back() + 1.0, 0.0, 1.0});
  return points;
}

double ComputeEer(const ScoreSet &s) {
  std::vector<OperatingPoint> pts = SweepOperatingPoints(s);
  double prev_d = pts[0].frr - pts[0].far;
  if (prev_d >= 0.0) return pts[0].frr;  // already crossed at the first point
  for (size_t i = 1; i < pts.size(); i++) {
    double d = pts[i].frr - pts[i].far;
    if (d >= 0.0) {
      if (d == 0.0) return pts[i].frr;
      double lambda = prev_d / (prev_d - d);  // in (0, 1]
      return pts[i - 1].frr + lambda * (pts[i].frr - pts[i - 1].frr);
    }
    prev_d = d;
  }
  // Unreachable: the final sweep point has FRR=1, FAR=0.
  return pts.back().frr;
}

std::vector<DetPoint> ComputeDet(const ScoreSet &s) {
  std::vector<OperatingPoint> pts = SweepOperatingPoints(s);
  std::vector<DetPoint> det;
  det.reserve(pts.size());
  for (const auto &p : pts) {
    double far = std::clamp(p.far, 1e-6, 1.0 - 1e-6);
    double frr = std::clamp(p.frr, 1e-6, 1.0 - 1e-6);
    det.push_back({p.far, p.frr, Probit(far), Probit(frr)});
  }
  return det;
}

DcfResult ComputeDcf(const ScoreSet &s, const DcfParams &p) {
  if (p.c_frr <= 0 || p.c_far <= 0)
    throw ConfigError("compute_dcf: costs must be positive");
  if (!(p.p_target > 0.0 && p.p_target < 1.0))
    throw ConfigError("compute_dcf: p_target must lie in (0,1)");
  std::vector<OperatingPoint> pts = SweepOperatingPoints(s);
  DcfResult best{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto &op : pts) {
    double c = p.c_frr * p.p_target * op.frr +
               p.c_far * (1.0 - p.p_target) * op.far;
    if (c < best.min_value) best = {c, op.threshold};
  }
  return best;
}

double Probit(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ContractError(StrCat("Probit: p must lie in (0,1), got ", p));
  // Rational approximation with frozen coefficients (relative error ~1e-9).
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// ---- text formats ----------------------------------------------------------

void WriteTrialList(const std::string &path, const TrialList &trials) {
  std::ofstream os(path);
  if (!os) throw DataError(StrCat("cannot write trial list: ", path));
  for (const auto &t : trials)
    os << t.enroll_id << " " << t.test_id << " "
       << (t.target ? "target" : "nontarget") << "\n";
}

TrialList ReadTrialList(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError(StrCat("cannot read trial list: ", path));
  TrialList trials;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Trial t;
    std::string label;
    if (!(ls >> t.enroll_id >> t.test_id >> label) ||
        (label != "target" && label != "nontarget"))
      throw FormatError(StrCat("bad trial at ", path, ":", lineno, ": '", line,
                               "'"));
    t.target = label == "target";
    trials.push_back(std::move(t));
  }
  return trials;
}

void WriteScores(const std::string &path, const ScoreSet &s) {
  if (s.trials.size() != s.scores.size())
    throw ContractError("WriteScores: trials/scores size mismatch");
  std::ofstream os(path);
  if (!os) throw DataError(StrCat("cannot write scores: ", path));
  char buf[64];
  for (size_t i = 0; i < s.trials.size(); i++) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.scores[i]);
    os << s.trials[i].enroll_id << " " << s.trials[i].test_id << " " << buf
       << "\n";
  }
}

ScoreSet ReadScores(const std::string &path, const TrialList &trials) {
  std::ifstream is(path);
  if (!is) throw DataError(StrCat("cannot read scores: ", path));
  ScoreSet s;
  s.trials = trials;
  std::string line;
  size_t i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (i >= trials.size())
      throw FormatError(StrCat("scores file has more lines than trials: ",
                               path));
    std::istringstream ls(line);
    std::string e, t;
    double score;
    if (!(ls >> e >> t >> score))
      throw FormatError(StrCat("bad score line: '", line, "'"));
    if (e != trials[i].enroll_id || t != trials[i].test_id)
      throw FormatError(StrCat("score line ", i, " does not match trial: ",
                               e, " ", t));
    s.scores.push_back(score);
    i++;
  }
  if (i != trials.size())
    throw FormatError(StrCat("scores file has ", i, " lines, expected ",
                             trials.size()));
  return s;
}

void WriteDetCsv(const std::string &path, const std::vector<DetPoint> &det) {
  std::ofstream os(path);
  if (!os) throw DataError(StrCat("cannot write DET csv: ", path));
  os << "far,frr,probit_far,probit_frr\n";
  char buf[128];
  for (const auto &p : det) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g", p.far, p.frr,
                  p.probit_far, p.probit_frr);
    os << buf << "\n";
  }
}

std::vector<DetPoint> ReadDetCsv(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw DataError(StrCat("cannot read DET csv: ", path));
  std::string line;
  if (!std::getline(is, line) || line != "far,frr,probit_far,probit_frr")
    throw FormatError(StrCat("DET csv missing header: ", path));
  std::vector<DetPoint> det;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    DetPoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p.far, &p.frr,
                    &p.probit_far, &p.probit_frr) != 4)
      throw FormatError(StrCat("bad DET csv line: '", line, "'"));
    det.push_back(p);
  }
  return det;
}

}  // namespace cpcv
