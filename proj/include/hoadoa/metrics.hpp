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
//
// Evaluation statistics: angular-error distributions (box plots),
// accuracy-vs-tolerance curves, SNR-binned summaries, and the report
// writers. All report angles are degrees with 4 decimal places.

#ifndef HOADOA_METRICS_HPP_
#define HOADOA_METRICS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "hoadoa/sh.hpp"

namespace hoadoa {

struct EvalRecord {
  std::string scene_id;
  Direction predicted;
  Direction label;
  double angular_error_deg = 0.0;  // in [0, 180]
  double snr_db = 0.0;
};

// Computes angular_error_deg from the two directions.
EvalRecord make_eval_record(std::string scene_id, const Direction& predicted,
                            const Direction& label, double snr_db);

// Five-number summary in degrees. Quantiles use linear interpolation
// between order statistics (h = p (n - 1)); whiskers are the extreme data
// points within 1.5 IQR beyond the quartiles, clipped to the box when no
// data lies beyond it.
struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
};

// Throws std::invalid_argument on empty input.
BoxStats box_stats(std::vector<double> values);

// For each tolerance: the fraction of errors strictly below it. Bounded
// in [0, 1] and non-decreasing in the tolerance. Throws on empty errors.
std::vector<double> accuracy_curve(const std::vector<double>& errors,
                                   const std::vector<double>& tolerances);

// One non-empty SNR bin [lo, hi) with the indices of its member records.
struct SnrBin {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<size_t> members;  // indices into the record list
  BoxStats stats;
};

// Partitions records by snr_db into [e_i, e_{i+1}); records outside the
// edge range are dropped, empty bins are absent from the result. Throws
// std::invalid_argument unless the edges are strictly increasing with at
// least two entries.
std::vector<SnrBin> snr_binned_stats(const std::vector<EvalRecord>& records,
                                     const std::vector<double>& edges);

// Per-axis arithmetic mean over frames, renormalized. A zero mean vector
// resolves to +z. Throws on empty input.
Direction aggregate_prediction(const std::vector<Vec3>& per_frame);

// CSV with header scene_id,pred_az_deg,pred_el_deg,label_az_deg,
// label_el_deg,error_deg,snr_db; numeric fields printed with 4 decimals.
void write_eval_csv(const std::string& path,
                    const std::vector<EvalRecord>& records);

// CSV with header tolerance_deg,accuracy.
void write_accuracy_csv(const std::string& path,
                        const std::vector<double>& tolerances,
                        const std::vector<double>& accuracy);

// Summary JSON: estimator name, record count, overall BoxStats, and the
// per-SNR-bin stats.
void write_summary_json(const std::string& path, const std::string& estimator,
                        const std::vector<EvalRecord>& records,
                        const std::vector<double>& snr_edges);

}  // namespace hoadoa

#endif  // HOADOA_METRICS_HPP_
