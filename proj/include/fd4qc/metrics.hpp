#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fd4qc/error.hpp"

namespace fd4qc {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predictions) {
  if (labels.size() != predictions.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(labels.size()) + " labels vs " +
                                          std::to_string(predictions.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) throw Error(Errc::BadLabel, "labels and predictions must be 0/1");
    if (y == 1) {
      (p == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (p == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

struct MetricsReport {
  std::string model_id;
  double accuracy = 0.0;
  double f_measure = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
  ConfusionMatrix counts;
  double wall_time_train = 0.0;  // seconds
  double wall_time_infer = 0.0;  // seconds
};

/// Every ratio whose denominator is zero is reported as 0.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw Error(Errc::EmptyMatrix, "no evaluated rows");
  const auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  MetricsReport r;
  r.counts = cm;
  r.accuracy = ratio(cm.tp + cm.tn, cm.total());
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.recall = ratio(cm.tp, cm.tp + cm.fn);
  r.f_measure = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.fpr = ratio(cm.fp, cm.fp + cm.tn);
  return r;
}

}  // namespace fd4qc
