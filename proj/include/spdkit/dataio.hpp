#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spdkit/iddl.hpp"

namespace spdkit {

/// Sample covariance of the rows of a T x m feature matrix plus ridge * I.
SpdMatrix covariance_descriptor(const Matrix& features, double ridge);

/// Wishart-style clusters around well-separated SPD class centers.
struct SyntheticSpec {
  int classes = 3;
  int dim = 5;
  int per_class = 100;
  // Degrees of freedom of the scatter around each center; larger is tighter.
  double spread = 20.0;
  std::uint64_t seed = 0;
  // Standard deviation of the entries of log(center).
  double center_scale = 0.5;
  // Minimum pairwise AIRM distance between class centers.
  double min_center_distance = 1.0;

  void validate() const;
};

LabeledSpdDataset generate_synthetic(const SyntheticSpec& spec, std::vector<SpdMatrix>* centers = nullptr);

// Stratified split; each class contributes round(fraction * count) samples to
// the first part, clamped so both parts keep at least one sample.
std::pair<LabeledSpdDataset, LabeledSpdDataset> split(const LabeledSpdDataset& data, double fraction,
                                                      std::uint64_t seed);

// Dataset container flag: regularize non-PD records on read instead of failing.
inline constexpr std::uint32_t kRepairOnRead = 1u << 0;

std::string serialize_dataset(const LabeledSpdDataset& data, std::uint32_t flags = 0);
LabeledSpdDataset deserialize_dataset(const std::string& bytes);
void write_dataset(const std::string& path, const LabeledSpdDataset& data, std::uint32_t flags = 0);
LabeledSpdDataset read_dataset(const std::string& path);

// One sample per line: label followed by the d*d entries row-major.
LabeledSpdDataset read_text_dataset(const std::string& path);

}  // namespace spdkit
