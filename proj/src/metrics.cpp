// Copyright 2026 The hoadoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hoadoa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace hoadoa {
namespace {

constexpr double kDegPerRad = 180.0 / kPi;

double round4(double v) { return std::llround(v * 1e4) / 1.0e4; }

void write_text_file(const std::string& path, const std::string& body,
                     const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(std::string(what) + ": cannot open " + path);
  out << body;
  if (!out) throw std::runtime_error(std::string(what) + ": write failed: " + path);
}

nlohmann::ordered_json box_json(const BoxStats& s) {
  nlohmann::ordered_json j;
  j["q1"] = round4(s.q1);
  j["median"] = round4(s.median);
  j["q3"] = round4(s.q3);
  j["whisker_low"] = round4(s.whisker_low);
  j["whisker_high"] = round4(s.whisker_high);
  return j;
}

}  // namespace

EvalRecord make_eval_record(std::string scene_id, const Direction& predicted,
                            const Direction& label, double snr_db) {
  EvalRecord r;
  r.scene_id = std::move(scene_id);
  r.predicted = predicted;
  r.label = label;
  r.angular_error_deg = angular_distance(predicted, label) * kDegPerRad;
  r.snr_db = snr_db;
  return r;
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty())
    throw std::invalid_argument("box_stats: empty input");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(h);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  BoxStats s;
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  for (double v : values) {
    if (v >= lo_fence) {
      s.whisker_low = std::min(v, s.q1);
      break;
    }
  }
  s.whisker_high = s.q3;
  for (auto it = values.rbegin(); it != values.rend(); ++it) {
    if (*it <= hi_fence) {
      s.whisker_high = std::max(*it, s.q3);
      break;
    }
  }
  return s;
}

std::vector<double> accuracy_curve(const std::vector<double>& errors,
                                   const std::vector<double>& tolerances) {
  if (errors.empty())
    throw std::invalid_argument("accuracy_curve: empty errors");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(tolerances.size());
  for (double tol : tolerances) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), tol);
    out.push_back(static_cast<double>(below - sorted.begin()) /
                  static_cast<double>(sorted.size()));
  }
  return out;
}

std::vector<SnrBin> snr_binned_stats(const std::vector<EvalRecord>& records,
                                     const std::vector<double>& edges) {
  if (edges.size() < 2)
    throw std::invalid_argument("snr_binned_stats: need at least two edges");
  for (size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw std::invalid_argument(
          "snr_binned_stats: edges must increase strictly");

  std::vector<SnrBin> bins(edges.size() - 1);
  for (size_t b = 0; b < bins.size(); ++b) {
    bins[b].lo = edges[b];
    bins[b].hi = edges[b + 1];
  }
  for (size_t i = 0; i < records.size(); ++i) {
    const double snr = records[i].snr_db;
    if (snr < edges.front() || snr >= edges.back()) continue;
    const size_t b =
        static_cast<size_t>(std::upper_bound(edges.begin(), edges.end(), snr) -
                            edges.begin()) -
        1;
    bins[b].members.push_back(i);
  }
  std::vector<SnrBin> out;
  for (SnrBin& bin : bins) {
    if (bin.members.empty()) continue;
    std::vector<double> errors;
    errors.reserve(bin.members.size());
    for (size_t i : bin.members) errors.push_back(records[i].angular_error_deg);
    bin.stats = box_stats(std::move(errors));
    out.push_back(std::move(bin));
  }
  return out;
}

Direction aggregate_prediction(const std::vector<Vec3>& per_frame) {
  if (per_frame.empty())
    throw std::invalid_argument("aggregate_prediction: empty input");
  Vec3 mean{};
  for (const Vec3& v : per_frame) mean = mean + v;
  mean = (1.0 / static_cast<double>(per_frame.size())) * mean;
  if (norm(mean) == 0.0) return Direction(kPi / 2.0, 0.0);
  return Direction::from_unit_vector(mean);
}

void write_eval_csv(const std::string& path,
                    const std::vector<EvalRecord>& records) {
  std::string body =
      "scene_id,pred_az_deg,pred_el_deg,label_az_deg,label_el_deg,"
      "error_deg,snr_db\n";
  char line[256];
  for (const EvalRecord& r : records) {
    std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                  r.scene_id.c_str(), r.predicted.azimuth() * kDegPerRad,
                  r.predicted.elevation() * kDegPerRad,
                  r.label.azimuth() * kDegPerRad,
                  r.label.elevation() * kDegPerRad, r.angular_error_deg,
                  r.snr_db);
    body += line;
  }
  write_text_file(path, body, "write_eval_csv");
}

void write_accuracy_csv(const std::string& path,
                        const std::vector<double>& tolerances,
                        const std::vector<double>& accuracy) {
  if (tolerances.size() != accuracy.size())
    throw std::invalid_argument("write_accuracy_csv: length mismatch");
  std::string body = "tolerance_deg,accuracy\n";
  char line[64];
  for (size_t i = 0; i < tolerances.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.4f,%.6f\n", tolerances[i],
                  accuracy[i]);
    body += line;
  }
  write_text_file(path, body, "write_accuracy_csv");
}

void write_summary_json(const std::string& path, const std::string& estimator,
                        const std::vector<EvalRecord>& records,
                        const std::vector<double>& snr_edges) {
  std::vector<double> errors;
  errors.reserve(records.size());
  for (const EvalRecord& r : records) errors.push_back(r.angular_error_deg);

  nlohmann::ordered_json j;
  j["estimator"] = estimator;
  j["records"] = records.size();
  j["overall"] = box_json(box_stats(errors));
  j["snr_bins"] = nlohmann::ordered_json::array();
  for (const SnrBin& bin : snr_binned_stats(records, snr_edges)) {
    nlohmann::ordered_json bj;
    bj["lo"] = bin.lo;
    bj["hi"] = bin.hi;
    bj["count"] = bin.members.size();
    bj["stats"] = box_json(bin.stats);
    j["snr_bins"].push_back(bj);
  }
  write_text_file(path, j.dump(2) + "\n", "write_summary_json");
}

}  // namespace hoadoa
