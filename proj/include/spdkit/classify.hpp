#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "spdkit/iddl.hpp"

namespace spdkit {

struct Prediction {
  int label = 0;
  // Winning row of W v for the ridge predictor; distance to the nearest
  // training sample for the 1-NN baselines.
  double score = 0.0;
};

// Argmax over rows of W encode(X); exact ties go to the smallest label.
Prediction predict_scored(const IddlModel& model, const SpdMatrix& x);
int predict(const IddlModel& model, const SpdMatrix& x);

enum class BaselineMetric { LogEuclidean, Airm, Jbld };

BaselineMetric parse_metric(std::string_view name);
std::string_view metric_name(BaselineMetric metric);

// ||Log X - Log Y||_F, sqrt(squared AIRM), or JBLD.
double baseline_distance(BaselineMetric metric, const SpdMatrix& x, const SpdMatrix& y);

/// 1-NN classifier under one of the standard SPD measures. Matrix logarithms
/// of the training set are cached for the log-Euclidean metric.
class NearestNeighbor {
 public:
  NearestNeighbor(LabeledSpdDataset train, BaselineMetric metric);

  // Ties go to the smallest training index.
  Prediction predict(const SpdMatrix& x) const;
  BaselineMetric metric() const { return metric_; }

 private:
  LabeledSpdDataset train_;
  BaselineMetric metric_;
  std::vector<Matrix> logs_;
};

int nn1(const LabeledSpdDataset& train, const SpdMatrix& x, BaselineMetric metric);

struct PredictionReport {
  int label_count = 0;
  std::vector<int> truth;
  std::vector<int> predicted;
  std::vector<double> scores;
  double accuracy = 0.0;
  // confusion[true - 1][predicted - 1]
  std::vector<std::vector<long>> confusion;
};

using Predictor = std::function<Prediction(const SpdMatrix&)>;

PredictionReport evaluate(const Predictor& predictor, const LabeledSpdDataset& test);
PredictionReport evaluate(const IddlModel& model, const LabeledSpdDataset& test);
PredictionReport evaluate(const NearestNeighbor& baseline, const LabeledSpdDataset& test);

// {"accuracy", "confusion", "per_sample": [{"index", "label", "predicted", "score"}]}
std::string report_json(const PredictionReport& report);
// index,label,predicted,score
std::string report_csv(const PredictionReport& report);

}  // namespace spdkit
