// SPDX-License-Identifier: Apache-2.0
#include "act/fmat.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace act {

std::string_view to_string(FmatErrorKind kind) {
  switch (kind) {
    case FmatErrorKind::Io: return "io";
    case FmatErrorKind::BadMagic: return "bad-magic";
    case FmatErrorKind::BadVersion: return "bad-version";
    case FmatErrorKind::BadShape: return "bad-shape";
    case FmatErrorKind::Truncated: return "truncated";
    case FmatErrorKind::TrailingBytes: return "trailing-bytes";
    case FmatErrorKind::NonFinite: return "non-finite";
  }
  return "unknown";
}

FmatError::FmatError(FmatErrorKind kind, const std::string& what)
    : std::runtime_error("fmat " + std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {

constexpr char kMagic[4] = {'F', 'M', 'A', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_fmat(const FeatureMatrix& m) {
  if (m.empty()) throw FmatError(FmatErrorKind::BadShape, "empty matrix");
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX)
    throw FmatError(FmatErrorKind::BadShape, "dimension exceeds u32");
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kFmatHeaderBytes + 4 * m.values().size());
  put_u32(out, kFmatVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) {
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) throw FmatError(FmatErrorKind::NonFinite, "value overflows binary32");
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

FeatureMatrix decode_fmat(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FmatError(FmatErrorKind::Truncated, "missing magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FmatError(FmatErrorKind::BadMagic, "expected \"FMAT\"");
  if (bytes.size() < kFmatHeaderBytes) throw FmatError(FmatErrorKind::Truncated, "short header");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kFmatVersion)
    throw FmatError(FmatErrorKind::BadVersion, "version " + std::to_string(version));
  const std::uint64_t rows = get_u32(bytes.data() + 8);
  const std::uint64_t cols = get_u32(bytes.data() + 12);
  if (rows == 0 || cols == 0) throw FmatError(FmatErrorKind::BadShape, "zero dimension");

  const std::uint64_t payload = rows * cols * 4;
  const std::uint64_t available = bytes.size() - kFmatHeaderBytes;
  if (available < payload)
    throw FmatError(FmatErrorKind::Truncated, "payload has " + std::to_string(available) +
                                                  " of " + std::to_string(payload) + " bytes");
  if (available > payload) throw FmatError(FmatErrorKind::TrailingBytes, "extra data after payload");

  std::vector<double> data(rows * cols);
  const std::uint8_t* p = bytes.data() + kFmatHeaderBytes;
  for (std::size_t i = 0; i < data.size(); ++i, p += 4) {
    const float f = std::bit_cast<float>(get_u32(p));
    if (!std::isfinite(f))
      throw FmatError(FmatErrorKind::NonFinite, "entry " + std::to_string(i) + " is NaN/Inf");
    data[i] = f;
  }
  return FeatureMatrix(rows, cols, std::move(data));
}

void write_fmat(const std::filesystem::path& path, const FeatureMatrix& m) {
  const auto bytes = encode_fmat(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FmatError(FmatErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FmatError(FmatErrorKind::Io, "write failed for " + path.string());
}

FeatureMatrix read_fmat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FmatError(FmatErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_fmat(bytes);
}

}  // namespace act
