#include <fstream>
#include <iterator>
#include <limits>

#include "binary.hpp"
#include "spdkit/iddl.hpp"

namespace spdkit {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::InvalidInput, "cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::InvalidInput, "failed writing '" + path + "'");
}

}  // namespace detail

namespace {

constexpr std::string_view kModelMagic = "IDDL";
constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kLearnedDictionary = 1u << 0;
constexpr std::uint32_t kLearnedParams = 1u << 1;

std::uint32_t checked_u32(Eigen::Index v) {
  if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) fail(ErrorCode::InvalidInput, "size exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string serialize_model(const IddlModel& model) {
  model.validate();
  const auto d = model.dictionary.dim();
  const auto n = model.dictionary.size();
  detail::ByteWriter out;
  out.raw(kModelMagic);
  out.u32(kModelVersion);
  out.u32(checked_u32(d));
  out.u32(checked_u32(n));
  out.u32(checked_u32(model.label_count));
  out.u32(static_cast<std::uint32_t>(variant_tag(model.params.mode)));
  out.u32((model.learned_dictionary ? kLearnedDictionary : 0u) | (model.learned_params ? kLearnedParams : 0u));
  out.u32(checked_u32(static_cast<Eigen::Index>(model.history.size())));
  out.f64(model.gamma);
  for (const auto& atom : model.dictionary.atoms) {
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) out.f64(atom(r, c));
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) out.f64(model.params.alpha(k));
  for (Eigen::Index k = 0; k < n; ++k) out.f64(model.params.beta(k));
  for (Eigen::Index r = 0; r < model.w.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.w.cols(); ++c) out.f64(model.w(r, c));
  }
  for (const auto& h : model.history) {
    out.f64(h.start);
    out.f64(h.after_dictionary);
    out.f64(h.after_params);
    out.f64(h.after_w);
  }
  return out.take();
}

IddlModel deserialize_model(const std::string& bytes) {
  detail::ByteReader in(bytes, "model");
  if (in.raw(4) != kModelMagic) fail(ErrorCode::CorruptFile, "model: bad magic");
  if (in.u32() != kModelVersion) fail(ErrorCode::CorruptFile, "model: unsupported version");
  const auto d = static_cast<Eigen::Index>(in.u32());
  const auto n = static_cast<Eigen::Index>(in.u32());
  const auto labels = static_cast<Eigen::Index>(in.u32());
  const auto tag = in.u32();
  const auto flags = in.u32();
  const auto history = in.u32();
  if (d < 1 || n < 1 || labels < 1 || tag > 127) fail(ErrorCode::CorruptFile, "model: invalid header");
  const std::size_t payload = 8u * static_cast<std::size_t>(n * d * d + 2 * n + labels * n + 4 * history);
  if (in.remaining() != 8 + payload) fail(ErrorCode::CorruptFile, "model: payload size does not match header");

  IddlModel model;
  try {
    model.params.mode = parse_variant(std::string(1, static_cast<char>(tag)));
  } catch (const Error&) {
    fail(ErrorCode::CorruptFile, "model: unknown variant tag");
  }
  model.label_count = static_cast<int>(labels);
  model.learned_dictionary = (flags & kLearnedDictionary) != 0;
  model.learned_params = (flags & kLearnedParams) != 0;
  model.gamma = in.f64();
  for (Eigen::Index k = 0; k < n; ++k) {
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = in.f64();
    }
    try {
      model.dictionary.atoms.push_back(SpdMatrix::checked(std::move(m)));
    } catch (const Error& e) {
      fail(ErrorCode::CorruptFile, "model: atom " + std::to_string(k) + ": " + e.what());
    }
  }
  model.params.alpha.resize(n);
  model.params.beta.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) model.params.alpha(k) = in.f64();
  for (Eigen::Index k = 0; k < n; ++k) model.params.beta(k) = in.f64();
  model.w.resize(labels, n);
  for (Eigen::Index r = 0; r < labels; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) model.w(r, c) = in.f64();
  }
  model.history.resize(history);
  for (auto& h : model.history) {
    h.start = in.f64();
    h.after_dictionary = in.f64();
    h.after_params = in.f64();
    h.after_w = in.f64();
  }
  in.expect_end();
  try {
    model.validate();
  } catch (const Error& e) {
    fail(ErrorCode::CorruptFile, std::string("model: ") + e.what());
  }
  return model;
}

void save_model(const std::string& path, const IddlModel& model) {
  detail::write_file(path, serialize_model(model));
}

IddlModel load_model(const std::string& path) { return deserialize_model(detail::read_file(path)); }

}  // namespace spdkit
