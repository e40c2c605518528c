// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "act/matrix.hpp"

namespace act {

// FMAT layout, all little-endian:
//   bytes 0..3    "FMAT"
//   bytes 4..7    u32 version (1)
//   bytes 8..11   u32 rows
//   bytes 12..15  u32 cols
//   then rows*cols IEEE-754 binary32 values, row-major.

inline constexpr std::uint32_t kFmatVersion = 1;
inline constexpr std::size_t kFmatHeaderBytes = 16;

enum class FmatErrorKind { Io, BadMagic, BadVersion, BadShape, Truncated, TrailingBytes, NonFinite };

std::string_view to_string(FmatErrorKind kind);

class FmatError : public std::runtime_error {
 public:
  FmatError(FmatErrorKind kind, const std::string& what);
  FmatErrorKind kind() const noexcept { return kind_; }

 private:
  FmatErrorKind kind_;
};

/// Encodes m; values are narrowed to binary32. Throws FmatError(NonFinite)
/// if a value overflows binary32.
std::vector<std::uint8_t> encode_fmat(const FeatureMatrix& m);
FeatureMatrix decode_fmat(const std::vector<std::uint8_t>& bytes);

void write_fmat(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_fmat(const std::filesystem::path& path);

}  // namespace act
