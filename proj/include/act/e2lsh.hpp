// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "act/matrix.hpp"

namespace act {

using BigInt = boost::multiprecision::cpp_int;

/// One family of L Euclidean LSH functions h_i(v) = floor((a_i . v + b_i) / r).
///
/// Rounds are drawn in order (a_0, b_0, a_1, b_1, ...) from one generator, so
/// the first L rounds of a family sampled with L' > L rounds are the family
/// sampled with L rounds under the same seed.
struct E2lshParams {
  FeatureMatrix a;         ///< L x D, standard normal entries.
  std::vector<double> b;   ///< L offsets, each in [0, r).
  double r = 8.0;          ///< Bucket width.
  std::uint32_t base = 4;  ///< B of the literal combined value.
  std::uint64_t seed = 0;

  std::size_t num_rounds() const { return b.size(); }
  std::size_t dim() const { return a.cols(); }
};

/// Draws a reproducible family. Requires rounds >= 1, dim >= 1, r > 0, base >= 2.
E2lshParams sample_params(std::uint64_t seed, std::size_t rounds, std::size_t dim, double r,
                          std::uint32_t base = 4);

/// floor((a . v + b) / r) for a single hyperplane family member.
std::int64_t e2lsh_hash(std::span<const double> a, double b, double r,
                        std::span<const double> v);

/// Hash of v under round i of params.
std::int64_t hash_round(std::span<const double> v, const E2lshParams& params, std::size_t i);

/// Bucket identity of one vector: the tuple of per-round hashes.
/// Equality and ordering are lexicographic over the tuple.
struct HashKey {
  std::vector<std::int64_t> per_round;

  /// sum_i base^i * h_i, computed without overflow.
  BigInt literal(std::uint32_t base) const;

  friend bool operator==(const HashKey&, const HashKey&) = default;
  friend auto operator<=>(const HashKey&, const HashKey&) = default;
};

HashKey hash_combined(std::span<const double> v, const E2lshParams& params);

/// Monte-Carlo estimate of P[hash_combined(x) == hash_combined(y)] for
/// ||x - y|| = distance. Each trial draws a fresh family (rounds, r and base
/// taken from the template, seed derived from template.seed and the trial
/// index), a standard-normal x and a uniformly random direction.
double estimate_collision_rate(double distance, std::size_t dim, const E2lshParams& family,
                               std::size_t trials);

}  // namespace act
