#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "noisebench/core/errors.hpp"

namespace noisebench {

struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::int64_t> counts;  // (true k, predicted i) row-major

  std::int64_t& at(int k, int i) { return counts[static_cast<std::size_t>(k) * num_classes + i]; }
  std::int64_t at(int k, int i) const { return counts[static_cast<std::size_t>(k) * num_classes + i]; }
  std::int64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& predictions, const std::vector<int>& labels,
                                        int num_classes) {
  if (predictions.size() != labels.size())
    throw DataError("confusion_matrix: predictions/labels length mismatch");
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  cm.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if (y < 0 || y >= num_classes || p < 0 || p >= num_classes)
      throw DataError("confusion_matrix: class index out of range at " + std::to_string(i));
    cm.at(y, p)++;
  }
  return cm;
}

struct MacroF1 {
  double macro = 0.0;
  std::vector<double> per_class;
};

// Unweighted mean of per-class F1. A class absent from both predictions and
// labels contributes F1 = 0 (missed classes are penalized, not excluded).
inline MacroF1 macro_f1_from_confusion(const ConfusionMatrix& cm) {
  MacroF1 out;
  out.per_class.resize(static_cast<std::size_t>(cm.num_classes), 0.0);
  for (int k = 0; k < cm.num_classes; ++k) {
    std::int64_t tp = cm.at(k, k), fn = 0, fp = 0;
    for (int i = 0; i < cm.num_classes; ++i) {
      if (i != k) {
        fn += cm.at(k, i);
        fp += cm.at(i, k);
      }
    }
    const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp) + static_cast<double>(fn);
    out.per_class[static_cast<std::size_t>(k)] = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  out.macro = std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) /
              static_cast<double>(cm.num_classes);
  return out;
}

inline MacroF1 macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels, int num_classes) {
  return macro_f1_from_confusion(confusion_matrix(predictions, labels, num_classes));
}

struct EpochMetrics {
  int epoch = 0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  ConfusionMatrix confusion;
};

struct MetricReport {
  std::vector<EpochMetrics> per_epoch;
  double best = 0.0;  // peak test macro-F1
  double last = 0.0;  // mean of the final five per-epoch values (all, if fewer)
  std::string seeds_meta;

  void recompute() {
    best = 0.0;
    last = 0.0;
    if (per_epoch.empty()) return;
    for (const auto& e : per_epoch) best = std::max(best, e.macro_f1);
    const std::size_t n = per_epoch.size();
    const std::size_t take = std::min<std::size_t>(5, n);
    double sum = 0.0;
    for (std::size_t i = n - take; i < n; ++i) sum += per_epoch[i].macro_f1;
    last = sum / static_cast<double>(take);
  }
};

// Append-only, order-checked.
inline void track(MetricReport& report, EpochMetrics epoch_value) {
  if (!report.per_epoch.empty() && epoch_value.epoch <= report.per_epoch.back().epoch)
    throw DataError("track: epoch " + std::to_string(epoch_value.epoch) + " appended out of order");
  report.per_epoch.push_back(std::move(epoch_value));
  report.recompute();
}

struct RobustnessCurve {
  // (epsilon, test performance), strictly increasing epsilons, must contain 0
  std::vector<std::pair<double, double>> points;

  void validate() const {
    if (points.empty()) throw DataError("robustness curve: empty");
    if (points.front().first != 0.0) throw DataError("robustness curve: missing epsilon = 0 point");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i].first <= points[i - 1].first)
        throw DataError("robustness curve: epsilons not strictly increasing");
    for (const auto& [eps, tp] : points)
      if (tp < 0.0 || tp > 1.0) throw DataError("robustness curve: performance outside [0,1]");
  }
};

struct RobustnessScore {
  double value = 0.0;
  bool degenerate = false;  // non-positive total drop; value is +inf sentinel
};

// R = (number of evaluated rates, eta = 0 included) / sum of (TP_0 - TP_eta).
inline RobustnessScore robustness_score(const RobustnessCurve& curve) {
  curve.validate();
  const double tp0 = curve.points.front().second;
  double drop_sum = 0.0;
  for (const auto& [eps, tp] : curve.points) drop_sum += tp0 - tp;
  RobustnessScore r;
  if (drop_sum <= 0.0) {
    r.value = std::numeric_limits<double>::infinity();
    r.degenerate = true;
    return r;
  }
  r.value = static_cast<double>(curve.points.size()) / drop_sum;
  return r;
}

struct EmbeddingMatrix {
  std::size_t n = 0, dim = 0;
  std::vector<double> vectors;  // n x dim row-major
  std::vector<int> labels;

  double at(std::size_t i, std::size_t d) const { return vectors[i * dim + d]; }
};

struct FisherCss {
  double value = 0.0;
  bool degenerate = false;  // zero within-class scatter; value is +inf sentinel
};

// CSS = [trace(S_B)/(c-1)] / [trace(S_W)/(n-c)] with S_B the count-weighted
// between-class scatter of class means about the global mean and S_W the
// pooled within-class scatter.
inline FisherCss fisher_css(const EmbeddingMatrix& emb) {
  if (emb.n == 0 || emb.labels.size() != emb.n || emb.vectors.size() != emb.n * emb.dim)
    throw DataError("fisher_css: malformed embedding matrix");
  const int c = 1 + *std::max_element(emb.labels.begin(), emb.labels.end());
  if (c < 2) throw DataError("fisher_css: need at least 2 classes");
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (int y : emb.labels) {
    if (y < 0) throw DataError("fisher_css: negative label");
    counts[static_cast<std::size_t>(y)]++;
  }
  for (int k = 0; k < c; ++k)
    if (counts[static_cast<std::size_t>(k)] < 2)
      throw DataError("fisher_css: class " + std::to_string(k) + " has fewer than 2 samples");

  std::vector<double> class_mean(static_cast<std::size_t>(c) * emb.dim, 0.0);
  std::vector<double> global_mean(emb.dim, 0.0);
  for (std::size_t i = 0; i < emb.n; ++i) {
    const auto k = static_cast<std::size_t>(emb.labels[i]);
    for (std::size_t d = 0; d < emb.dim; ++d) {
      class_mean[k * emb.dim + d] += emb.at(i, d);
      global_mean[d] += emb.at(i, d);
    }
  }
  for (std::size_t k = 0; k < static_cast<std::size_t>(c); ++k)
    for (std::size_t d = 0; d < emb.dim; ++d) class_mean[k * emb.dim + d] /= static_cast<double>(counts[k]);
  for (std::size_t d = 0; d < emb.dim; ++d) global_mean[d] /= static_cast<double>(emb.n);

  double trace_sb = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(c); ++k)
    for (std::size_t d = 0; d < emb.dim; ++d) {
      const double diff = class_mean[k * emb.dim + d] - global_mean[d];
      trace_sb += static_cast<double>(counts[k]) * diff * diff;
    }
  double trace_sw = 0.0;
  for (std::size_t i = 0; i < emb.n; ++i) {
    const auto k = static_cast<std::size_t>(emb.labels[i]);
    for (std::size_t d = 0; d < emb.dim; ++d) {
      const double diff = emb.at(i, d) - class_mean[k * emb.dim + d];
      trace_sw += diff * diff;
    }
  }

  FisherCss out;
  const double between = trace_sb / static_cast<double>(c - 1);
  const double within = trace_sw / static_cast<double>(emb.n - static_cast<std::size_t>(c));
  if (within <= 0.0) {
    out.value = std::numeric_limits<double>::infinity();
    out.degenerate = true;
    return out;
  }
  out.value = between / within;
  return out;
}

struct SweepRow {
  std::string dataset;
  double axis_value = 0.0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;
  int folds = 0;
  bool skipped = false;  // axis value exceeded dataset capacity
};

}  // namespace noisebench

#include "noisebench/dataman.hpp"

namespace noisebench {

struct SweepPoint {
  std::string dataset;
  double axis_value = 0.0;
  // manifests for each fold at this configuration; empty marks a point that
  // exceeded the dataset's capacity and is recorded as skipped
  std::vector<DatasetManifest> folds;
};

// Runs train_fn on every fold of every feasible point; each row carries the
// fold mean and standard deviation of the returned test macro-F1.
inline std::vector<SweepRow> difficulty_sweep(const std::vector<SweepPoint>& points,
                                              const std::function<double(const DatasetManifest&)>& train_fn) {
  std::vector<SweepRow> rows;
  rows.reserve(points.size());
  for (const auto& pt : points) {
    SweepRow row;
    row.dataset = pt.dataset;
    row.axis_value = pt.axis_value;
    if (pt.folds.empty()) {
      row.skipped = true;
      rows.push_back(std::move(row));
      continue;
    }
    std::vector<double> scores;
    scores.reserve(pt.folds.size());
    for (const auto& fold : pt.folds) scores.push_back(train_fn(fold));
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    var /= static_cast<double>(scores.size());
    row.mean_f1 = mean;
    row.std_f1 = std::sqrt(var);
    row.folds = static_cast<int>(scores.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace noisebench
