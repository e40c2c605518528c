// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "act/matrix.hpp"

namespace act {

/// Gaussian mixture standing in for encoder features: tokens drawn around a
/// few well-separated centers.
struct SyntheticSpec {
  std::size_t num_blobs = 8;
  double blob_spread = 0.1;       ///< per-coordinate standard deviation within a blob
  double blob_separation = 4.0;   ///< norm of every blob center
  std::size_t num_tokens = 256;
  std::size_t dim = 32;
  double mixing = 0.0;            ///< per-layer homogenization, consumed by the encoder study
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledFeatures {
  FeatureMatrix x;
  std::vector<std::size_t> blob;  ///< blob index of every row
  FeatureMatrix centers;          ///< num_blobs x dim
};

/// Centers are blob_separation times independent uniform directions; each
/// token picks a blob uniformly and adds N(0, blob_spread^2) noise per coordinate.
LabeledFeatures gen_synthetic_labeled(const SyntheticSpec& spec);

FeatureMatrix gen_synthetic(const SyntheticSpec& spec);

}  // namespace act
