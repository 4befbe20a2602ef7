#include "spdkit/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "binary.hpp"

namespace spdkit {

namespace {

constexpr std::string_view kDatasetMagic = "SPDS";
constexpr std::uint32_t kDatasetVersion = 1;

// A A^T / dof with A the Bartlett factor of a Wishart(dof, I) draw, so the
// result has mean I.
Matrix normalized_scatter(Eigen::Index d, double dof, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    std::chi_squared_distribution<double> chi(dof - static_cast<double>(i));
    a(i, i) = std::sqrt(chi(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal(rng);
  }
  return a * a.transpose() / dof;
}

}  // namespace

SpdMatrix covariance_descriptor(const Matrix& features, double ridge) {
  if (features.rows() < 2 || features.cols() < 1) {
    fail(ErrorCode::InvalidInput, "covariance_descriptor: need at least 2 feature rows");
  }
  if (!(ridge >= 0.0) || !features.allFinite()) {
    fail(ErrorCode::InvalidInput, "covariance_descriptor: ridge must be >= 0 and features finite");
  }
  const Eigen::RowVectorXd mean = features.colwise().mean();
  const Matrix centered = features.rowwise() - mean;
  Matrix cov = centered.transpose() * centered / static_cast<double>(features.rows() - 1);
  cov.diagonal().array() += ridge;
  try {
    return SpdMatrix::checked(sym(cov));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotPositiveDefinite) {
      fail(ErrorCode::NotPositiveDefinite, "covariance_descriptor: covariance is singular; use ridge > 0");
    }
    throw;
  }
}

void SyntheticSpec::validate() const {
  if (classes < 1 || dim < 1 || per_class < 0) fail(ErrorCode::InvalidInput, "SyntheticSpec: invalid sizes");
  if (!(spread > static_cast<double>(dim - 1))) fail(ErrorCode::InvalidInput, "SyntheticSpec: spread must exceed d - 1");
  if (!(center_scale > 0.0) || !(min_center_distance >= 0.0)) {
    fail(ErrorCode::InvalidInput, "SyntheticSpec: invalid center settings");
  }
}

LabeledSpdDataset generate_synthetic(const SyntheticSpec& spec, std::vector<SpdMatrix>* centers_out) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index d = spec.dim;

  std::vector<SpdMatrix> centers;
  double scale = spec.center_scale;
  int attempts = 0;
  while (static_cast<int>(centers.size()) < spec.classes) {
    Matrix s(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) s(i, j) = s(j, i) = scale * normal(rng);
    }
    SpdMatrix candidate = spd_exp(s);
    bool far_enough = true;
    for (const auto& c : centers) {
      if (std::sqrt(abld_airm(c, candidate)) < spec.min_center_distance) {
        far_enough = false;
        break;
      }
    }
    if (far_enough) {
      centers.push_back(std::move(candidate));
    } else if (++attempts % 100 == 0) {
      scale *= 1.5;
    }
  }

  LabeledSpdDataset data;
  data.label_count = spec.classes;
  for (int c = 0; c < spec.classes; ++c) {
    const auto& center = centers[static_cast<std::size_t>(c)];
    const Matrix root = spd_sqrt(center).matrix();
    for (int i = 0; i < spec.per_class; ++i) {
      const Matrix scatter = normalized_scatter(d, spec.spread, rng);
      data.samples.push_back(SpdMatrix::checked(sym(root * scatter * root)));
      data.labels.push_back(c + 1);
    }
  }
  data.validate(true);
  if (centers_out != nullptr) *centers_out = std::move(centers);
  return data;
}

std::pair<LabeledSpdDataset, LabeledSpdDataset> split(const LabeledSpdDataset& data, double fraction,
                                                      std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) fail(ErrorCode::InvalidInput, "split: fraction must be in (0, 1)");
  data.validate(false);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  for (int c = 1; c <= data.label_count; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      fail(ErrorCode::InvalidDataset, "split: class " + std::to_string(c) + " has fewer than 2 samples");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto total = static_cast<double>(members.size());
    auto take = static_cast<std::size_t>(std::llround(fraction * total));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    first.insert(first.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    second.insert(second.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  auto gather = [&](const std::vector<std::size_t>& idx) {
    LabeledSpdDataset part;
    part.label_count = data.label_count;
    for (auto i : idx) {
      part.samples.push_back(data.samples[i]);
      part.labels.push_back(data.labels[i]);
    }
    return part;
  };
  return {gather(first), gather(second)};
}

std::string serialize_dataset(const LabeledSpdDataset& data, std::uint32_t flags) {
  data.validate(false);
  const auto d = data.dim();
  detail::ByteWriter out;
  out.raw(kDatasetMagic);
  out.u32(kDatasetVersion);
  out.u32(static_cast<std::uint32_t>(d));
  out.u32(static_cast<std::uint32_t>(data.size()));
  out.u32(static_cast<std::uint32_t>(data.label_count));
  out.u32(flags);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.u32(static_cast<std::uint32_t>(data.labels[i]));
    const auto& m = data.samples[i];
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) out.f64(m(r, c));
    }
  }
  return out.take();
}

LabeledSpdDataset deserialize_dataset(const std::string& bytes) {
  detail::ByteReader in(bytes, "dataset");
  if (in.raw(4) != kDatasetMagic) fail(ErrorCode::CorruptFile, "dataset: bad magic");
  if (in.u32() != kDatasetVersion) fail(ErrorCode::CorruptFile, "dataset: unsupported version");
  const auto d = static_cast<Eigen::Index>(in.u32());
  const auto count = static_cast<std::size_t>(in.u32());
  const auto labels = in.u32();
  const auto flags = in.u32();
  if (d < 1 || labels < 1) fail(ErrorCode::CorruptFile, "dataset: invalid header");
  const std::size_t record = 4 + 8 * static_cast<std::size_t>(d * (d + 1) / 2);
  if (in.remaining() != count * record) {
    fail(ErrorCode::CorruptFile, "dataset: payload holds " + std::to_string(in.remaining()) + " bytes, header implies " +
                                     std::to_string(count * record));
  }
  LabeledSpdDataset data;
  data.label_count = static_cast<int>(labels);
  data.samples.reserve(count);
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto label = in.u32();
    if (label < 1 || label > labels) fail(ErrorCode::CorruptFile, "dataset: record " + std::to_string(i) + " label out of range");
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c <= r; ++c) m(r, c) = m(c, r) = in.f64();
    }
    try {
      data.samples.push_back(SpdMatrix::checked(m));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotPositiveDefinite && (flags & kRepairOnRead) != 0) {
        data.samples.push_back(regularize(m));
      } else {
        throw Error(e.code(), "dataset: record " + std::to_string(i) + ": " + e.what());
      }
    }
    data.labels.push_back(static_cast<int>(label));
  }
  return data;
}

void write_dataset(const std::string& path, const LabeledSpdDataset& data, std::uint32_t flags) {
  detail::write_file(path, serialize_dataset(data, flags));
}

LabeledSpdDataset read_dataset(const std::string& path) { return deserialize_dataset(detail::read_file(path)); }

LabeledSpdDataset read_text_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  LabeledSpdDataset data;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index d = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream fields(line);
    int label = 0;
    if (!(fields >> label)) fail(ErrorCode::InvalidInput, "text dataset line " + std::to_string(line_no) + ": bad label");
    std::vector<double> values;
    double x = 0.0;
    while (fields >> x) values.push_back(x);
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
    if (side < 1 || static_cast<std::size_t>(side * side) != values.size() || (d != 0 && side != d)) {
      fail(ErrorCode::InvalidInput, "text dataset line " + std::to_string(line_no) + ": expected d*d entries");
    }
    d = side;
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = values[static_cast<std::size_t>(r * d + c)];
    }
    try {
      data.samples.push_back(SpdMatrix::checked(std::move(m)));
    } catch (const Error& e) {
      throw Error(e.code(), "text dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    data.labels.push_back(label);
    data.label_count = std::max(data.label_count, label);
  }
  data.validate(false);
  return data;
}

}  // namespace spdkit
