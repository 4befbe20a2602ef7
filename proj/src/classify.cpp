#include "spdkit/classify.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "spdkit/parallel.hpp"

namespace spdkit {

Prediction predict_scored(const IddlModel& model, const SpdMatrix& x) {
  if (x.dim() != model.dictionary.dim()) fail(ErrorCode::DimensionMismatch, "predict: sample dim differs from model");
  const Vector scores = model.w * encode(x, model.dictionary, model.params);
  Eigen::Index best = 0;
  for (Eigen::Index r = 1; r < scores.size(); ++r) {
    if (scores(r) > scores(best)) best = r;
  }
  return {static_cast<int>(best) + 1, scores(best)};
}

int predict(const IddlModel& model, const SpdMatrix& x) { return predict_scored(model, x).label; }

BaselineMetric parse_metric(std::string_view name) {
  if (name == "le" || name == "LE") return BaselineMetric::LogEuclidean;
  if (name == "airm" || name == "AIRM") return BaselineMetric::Airm;
  if (name == "jbld" || name == "JBLD") return BaselineMetric::Jbld;
  fail(ErrorCode::InvalidInput, "unknown baseline metric '" + std::string(name) + "' (expected le, airm, jbld)");
}

std::string_view metric_name(BaselineMetric metric) {
  switch (metric) {
    case BaselineMetric::LogEuclidean: return "le";
    case BaselineMetric::Airm: return "airm";
    case BaselineMetric::Jbld: return "jbld";
  }
  return "?";
}

double baseline_distance(BaselineMetric metric, const SpdMatrix& x, const SpdMatrix& y) {
  if (x.dim() != y.dim()) fail(ErrorCode::DimensionMismatch, "baseline_distance: dim mismatch");
  switch (metric) {
    case BaselineMetric::LogEuclidean: return (spd_log(x) - spd_log(y)).norm();
    case BaselineMetric::Airm: return std::sqrt(abld_airm(x, y));
    case BaselineMetric::Jbld: return jbld(x, y);
  }
  return 0.0;
}

NearestNeighbor::NearestNeighbor(LabeledSpdDataset train, BaselineMetric metric)
    : train_(std::move(train)), metric_(metric) {
  train_.validate(false);
  if (metric_ == BaselineMetric::LogEuclidean) {
    logs_.resize(train_.size());
    parallel_for(train_.size(), [&](std::size_t i) { logs_[i] = spd_log(train_.samples[i]); });
  }
}

Prediction NearestNeighbor::predict(const SpdMatrix& x) const {
  if (x.dim() != train_.dim()) fail(ErrorCode::DimensionMismatch, "nn1: query dim differs from training set");
  Matrix query_log;
  if (metric_ == BaselineMetric::LogEuclidean) query_log = spd_log(x);
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < train_.size(); ++i) {
    const double dist = metric_ == BaselineMetric::LogEuclidean ? (query_log - logs_[i]).norm()
                                                               : baseline_distance(metric_, x, train_.samples[i]);
    if (dist < best) {
      best = dist;
      arg = i;
    }
  }
  return {train_.labels[arg], best};
}

int nn1(const LabeledSpdDataset& train, const SpdMatrix& x, BaselineMetric metric) {
  return NearestNeighbor(train, metric).predict(x).label;
}

PredictionReport evaluate(const Predictor& predictor, const LabeledSpdDataset& test) {
  if (test.size() == 0) fail(ErrorCode::InvalidInput, "evaluate: empty test set");
  test.validate(false);
  PredictionReport report;
  report.label_count = test.label_count;
  report.truth = test.labels;
  report.predicted.assign(test.size(), 0);
  report.scores.assign(test.size(), 0.0);
  parallel_for(test.size(), [&](std::size_t i) {
    const Prediction p = predictor(test.samples[i]);
    report.predicted[i] = p.label;
    report.scores[i] = p.score;
  });
  const auto l = static_cast<std::size_t>(test.label_count);
  report.confusion.assign(l, std::vector<long>(l, 0));
  long correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int p = report.predicted[i];
    if (p < 1 || p > test.label_count) {
      fail(ErrorCode::InvalidInput, "evaluate: predicted label " + std::to_string(p) + " outside the test label space");
    }
    ++report.confusion[static_cast<std::size_t>(test.labels[i] - 1)][static_cast<std::size_t>(p - 1)];
    if (p == test.labels[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  return report;
}

PredictionReport evaluate(const IddlModel& model, const LabeledSpdDataset& test) {
  return evaluate([&](const SpdMatrix& x) { return predict_scored(model, x); }, test);
}

PredictionReport evaluate(const NearestNeighbor& baseline, const LabeledSpdDataset& test) {
  return evaluate([&](const SpdMatrix& x) { return baseline.predict(x); }, test);
}

std::string report_json(const PredictionReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["confusion"] = report.confusion;
  auto& per = j["per_sample"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.truth.size(); ++i) {
    per.push_back({{"index", i}, {"label", report.truth[i]}, {"predicted", report.predicted[i]},
                   {"score", report.scores[i]}});
  }
  return j.dump(2);
}

std::string report_csv(const PredictionReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "index,label,predicted,score\n";
  for (std::size_t i = 0; i < report.truth.size(); ++i) {
    out << i << ',' << report.truth[i] << ',' << report.predicted[i] << ',' << report.scores[i] << '\n';
  }
  return out.str();
}

}  // namespace spdkit
