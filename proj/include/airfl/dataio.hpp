#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "airfl/objectives.hpp"
#include "airfl/rng.hpp"

namespace airfl {

/// Parse failure with the byte offset where the stream became invalid.
class IdxError : public std::runtime_error {
 public:
  IdxError(std::size_t offset, const std::string& what)
      : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class IdxType : std::uint8_t {
  u8 = 0x08,
  i8 = 0x09,
  i16 = 0x0B,
  i32 = 0x0C,
  f32 = 0x0D,
  f64 = 0x0E,
};

inline std::size_t idx_element_size(IdxType t) {
  switch (t) {
    case IdxType::u8:
    case IdxType::i8:
      return 1;
    case IdxType::i16:
      return 2;
    case IdxType::i32:
    case IdxType::f32:
      return 4;
    case IdxType::f64:
      return 8;
  }
  throw std::invalid_argument("idx_element_size: unknown dtype");
}

/// An IDX tensor: dtype code, dimension sizes, and the flat element buffer.
/// The payload is kept in file order (big-endian); accessors decode.
struct IdxTensor {
  IdxType dtype = IdxType::u8;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }

  std::uint8_t u8_at(std::size_t i) const { return payload.at(i); }

  double value_at(std::size_t i) const {
    const std::size_t es = idx_element_size(dtype);
    const std::size_t off = i * es;
    if (off + es > payload.size()) throw std::out_of_range("IdxTensor: element index");
    std::uint64_t raw = 0;
    for (std::size_t b = 0; b < es; ++b) raw = (raw << 8) | payload[off + b];
    switch (dtype) {
      case IdxType::u8:
        return static_cast<double>(static_cast<std::uint8_t>(raw));
      case IdxType::i8:
        return static_cast<double>(static_cast<std::int8_t>(raw));
      case IdxType::i16:
        return static_cast<double>(static_cast<std::int16_t>(raw));
      case IdxType::i32:
        return static_cast<double>(static_cast<std::int32_t>(raw));
      case IdxType::f32: {
        float f;
        std::uint32_t bits = static_cast<std::uint32_t>(raw);
        std::memcpy(&f, &bits, sizeof f);
        return static_cast<double>(f);
      }
      case IdxType::f64: {
        double f;
        std::memcpy(&f, &raw, sizeof f);
        return f;
      }
    }
    throw std::logic_error("IdxTensor: unknown dtype");
  }
};

/// Parses the IDX container: big-endian magic (0x00, 0x00, dtype, ndims),
/// then ndims big-endian u32 sizes, then row-major data. Dimension sizes are
/// validated against the buffer length before any allocation, and the buffer
/// must contain exactly the declared payload.
inline IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw IdxError(bytes.size(), "truncated magic");
  if (bytes[0] != 0 || bytes[1] != 0)
    throw IdxError(bytes[0] != 0 ? 0 : 1, "bad magic: first two bytes must be zero");
  const std::uint8_t dtype_code = bytes[2];
  switch (dtype_code) {
    case 0x08:
    case 0x09:
    case 0x0B:
    case 0x0C:
    case 0x0D:
    case 0x0E:
      break;
    default:
      throw IdxError(2, "unknown dtype code");
  }
  const IdxType dtype = static_cast<IdxType>(dtype_code);
  const std::size_t ndims = bytes[3];
  if (ndims == 0) throw IdxError(3, "dimension count must be >= 1");

  const std::size_t header_size = 4 + 4 * ndims;
  if (bytes.size() < header_size)
    throw IdxError(bytes.size(), "truncated dimension list");

  std::vector<std::uint32_t> dims(ndims);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const std::size_t off = 4 + 4 * i;
    dims[i] = (static_cast<std::uint32_t>(bytes[off]) << 24) |
              (static_cast<std::uint32_t>(bytes[off + 1]) << 16) |
              (static_cast<std::uint32_t>(bytes[off + 2]) << 8) |
              static_cast<std::uint32_t>(bytes[off + 3]);
    if (dims[i] != 0 && count > std::numeric_limits<std::size_t>::max() / dims[i])
      throw IdxError(off, "declared size overflows");
    count *= dims[i];
  }
  const std::size_t elem_size = idx_element_size(dtype);
  if (count > std::numeric_limits<std::size_t>::max() / elem_size)
    throw IdxError(header_size, "declared size overflows");
  const std::size_t payload_size = count * elem_size;
  if (bytes.size() < header_size + payload_size)
    throw IdxError(bytes.size(), "truncated payload");
  if (bytes.size() > header_size + payload_size)
    throw IdxError(header_size + payload_size, "trailing bytes after payload");

  IdxTensor out;
  out.dtype = dtype;
  out.dims = std::move(dims);
  out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header_size), bytes.end());
  return out;
}

inline std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor) {
  if (tensor.dims.empty()) throw std::invalid_argument("serialize_idx: no dimensions");
  if (tensor.dims.size() > 255) throw std::invalid_argument("serialize_idx: too many dimensions");
  if (tensor.payload.size() != tensor.element_count() * idx_element_size(tensor.dtype))
    throw std::invalid_argument("serialize_idx: payload size does not match dims");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.payload.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(tensor.dtype));
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) {
    out.push_back(static_cast<std::uint8_t>(d >> 24));
    out.push_back(static_cast<std::uint8_t>(d >> 16));
    out.push_back(static_cast<std::uint8_t>(d >> 8));
    out.push_back(static_cast<std::uint8_t>(d));
  }
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  return out;
}

inline IdxTensor load_idx_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_idx_file: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

inline void save_idx_file(const IdxTensor& tensor, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_idx(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_idx_file: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_idx_file: write failed for " + path);
}

/// Even digit -> +1, odd digit -> -1. Rejects anything outside 0..9.
inline Eigen::VectorXd parity_labels(std::span<const std::uint8_t> digits) {
  Eigen::VectorXd out(static_cast<long>(digits.size()));
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] > 9)
      throw std::invalid_argument("parity_labels: digit out of range at index " +
                                  std::to_string(i));
    out[static_cast<long>(i)] = (digits[i] % 2 == 0) ? 1.0 : -1.0;
  }
  return out;
}

/// Flattens a [N, rows, cols] u8 image tensor into N x (rows*cols [+1]) real
/// features scaled to [0,1]; the optional trailing constant-1 column carries
/// the bias term.
inline Eigen::MatrixXd image_features(const IdxTensor& images, bool append_bias) {
  if (images.dims.size() != 3)
    throw std::invalid_argument("image_features: expected a [N, rows, cols] tensor");
  if (images.dtype != IdxType::u8)
    throw std::invalid_argument("image_features: expected unsigned byte pixels");
  const long n = static_cast<long>(images.dims[0]);
  const long pixels = static_cast<long>(images.dims[1]) * static_cast<long>(images.dims[2]);
  Eigen::MatrixXd out(n, pixels + (append_bias ? 1 : 0));
  for (long i = 0; i < n; ++i) {
    for (long p = 0; p < pixels; ++p)
      out(i, p) = static_cast<double>(
                      images.u8_at(static_cast<std::size_t>(i * pixels + p))) /
                  255.0;
    if (append_bias) out(i, pixels) = 1.0;
  }
  return out;
}

/// K disjoint client datasets plus one held-out test set.
struct FederatedSplit {
  std::vector<LabeledDataset> clients;
  LabeledDataset test;
};

/// Uniform random disjoint assignment of K*per_client training samples and
/// test_size test samples, via a seeded Fisher-Yates shuffle.
inline FederatedSplit make_split(const LabeledDataset& data, int clients, long per_client,
                                 long test_size, Rng& rng) {
  data.validate();
  if (clients < 1) throw std::invalid_argument("make_split: clients must be >= 1");
  if (per_client < 1 || test_size < 0)
    throw std::invalid_argument("make_split: sizes must be positive");
  const long needed = static_cast<long>(clients) * per_client + test_size;
  if (needed > data.size())
    throw std::invalid_argument("make_split: dataset has " + std::to_string(data.size()) +
                                " samples, need " + std::to_string(needed));

  std::vector<std::size_t> order(static_cast<std::size_t>(data.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  auto take = [&](std::size_t start, long count) {
    LabeledDataset d;
    d.features.resize(count, data.features.cols());
    d.labels.resize(count);
    for (long i = 0; i < count; ++i) {
      const std::size_t src = order[start + static_cast<std::size_t>(i)];
      d.features.row(i) = data.features.row(static_cast<long>(src));
      d.labels[i] = data.labels[static_cast<long>(src)];
    }
    return d;
  };

  FederatedSplit split;
  std::size_t cursor = 0;
  for (int k = 0; k < clients; ++k) {
    split.clients.push_back(take(cursor, per_client));
    cursor += static_cast<std::size_t>(per_client);
  }
  split.test = take(cursor, test_size);
  return split;
}

struct SynthQuadratic {
  Objective objective;       // quadratic kind, per-client design blocks
  Eigen::VectorXd w_planted; // generator's target vector, for reference
};

/// Gaussian regression blocks with a geometrically spaced feature covariance
/// so the average Gram's condition number lands near `condition_target`.
/// Targets are A * w_planted + noise.
inline SynthQuadratic synth_quadratic(int clients, long dim, long samples_per_client,
                                      double condition_target, Rng& rng,
                                      double noise_std = 0.1, double lambda = 0.0) {
  if (clients < 1 || dim < 1 || samples_per_client < 1)
    throw std::invalid_argument("synth_quadratic: sizes must be positive");
  if (!(condition_target >= 1.0))
    throw std::invalid_argument("synth_quadratic: condition_target must be >= 1");
  if (noise_std < 0.0) throw std::invalid_argument("synth_quadratic: noise_std must be >= 0");

  Eigen::VectorXd scales(dim);
  for (long j = 0; j < dim; ++j) {
    const double frac = dim == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(dim - 1);
    scales[j] = std::pow(condition_target, -0.5 * frac);  // sqrt of eigenvalue
  }

  SynthQuadratic out;
  out.w_planted.resize(dim);
  for (long j = 0; j < dim; ++j) out.w_planted[j] = rng.gaussian();

  out.objective.kind = ObjectiveKind::quadratic;
  out.objective.lambda = lambda;
  for (int k = 0; k < clients; ++k) {
    Eigen::MatrixXd a(samples_per_client, dim);
    for (long i = 0; i < samples_per_client; ++i)
      for (long j = 0; j < dim; ++j) a(i, j) = rng.gaussian() * scales[j];
    Eigen::VectorXd b = a * out.w_planted;
    if (noise_std > 0.0)
      for (long i = 0; i < samples_per_client; ++i) b[i] += noise_std * rng.gaussian();
    out.objective.client_features.push_back(std::move(a));
    out.objective.client_targets.push_back(std::move(b));
  }
  return out;
}

}  // namespace airfl
