// SPDX-License-Identifier: Apache-2.0
#include "act/synthetic.hpp"

#include <cmath>
#include <random>

namespace act {

void SyntheticSpec::validate() const {
  require(num_blobs >= 1 && num_tokens >= num_blobs, "SyntheticSpec: need N >= num_blobs >= 1");
  require(dim >= 1, "SyntheticSpec: dim must be >= 1");
  require(std::isfinite(blob_spread) && blob_spread >= 0.0, "SyntheticSpec: spread must be >= 0");
  require(std::isfinite(blob_separation) && blob_separation >= 0.0,
          "SyntheticSpec: separation must be >= 0");
  require(mixing >= 0.0 && mixing <= 1.0, "SyntheticSpec: mixing must be in [0, 1]");
}

LabeledFeatures gen_synthetic_labeled(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  FeatureMatrix centers(spec.num_blobs, spec.dim);
  for (std::size_t b = 0; b < spec.num_blobs; ++b) {
    auto row = centers.row(b);
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : row) v = normal(rng);
      norm = std::sqrt(dot(row, row));
    }
    for (double& v : row) v *= spec.blob_separation / norm;
  }

  std::uniform_int_distribution<std::size_t> pick(0, spec.num_blobs - 1);
  LabeledFeatures out{FeatureMatrix(spec.num_tokens, spec.dim), {}, centers};
  out.blob.reserve(spec.num_tokens);
  for (std::size_t i = 0; i < spec.num_tokens; ++i) {
    const std::size_t b = pick(rng);
    out.blob.push_back(b);
    auto row = out.x.row(i);
    auto c = centers.row(b);
    for (std::size_t j = 0; j < spec.dim; ++j) row[j] = c[j] + spec.blob_spread * normal(rng);
  }
  return out;
}

FeatureMatrix gen_synthetic(const SyntheticSpec& spec) {
  return gen_synthetic_labeled(spec).x;
}

}  // namespace act
