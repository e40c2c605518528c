// SPDX-License-Identifier: Apache-2.0
#include "act/e2lsh.hpp"

#include <cmath>
#include <random>

#include "act/seed.hpp"

namespace act {

namespace {

// Past this magnitude the floor no longer fits comfortably in int64.
constexpr double kMaxHash = 4.0e18;

}  // namespace

E2lshParams sample_params(std::uint64_t seed, std::size_t rounds, std::size_t dim, double r,
                          std::uint32_t base) {
  require(rounds >= 1, "sample_params: rounds must be >= 1");
  require(dim >= 1, "sample_params: dim must be >= 1");
  require(std::isfinite(r) && r > 0.0, "sample_params: r must be positive");
  require(base >= 2, "sample_params: base must be >= 2");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, r);

  E2lshParams p;
  p.a = FeatureMatrix(rounds, dim);
  p.b.resize(rounds);
  p.r = r;
  p.base = base;
  p.seed = seed;
  for (std::size_t i = 0; i < rounds; ++i) {
    for (double& x : p.a.row(i)) x = normal(rng);
    double b;
    do {
      b = uniform(rng);
    } while (b >= r);  // uniform_real_distribution may round up to r
    p.b[i] = b;
  }
  return p;
}

std::int64_t e2lsh_hash(std::span<const double> a, double b, double r,
                        std::span<const double> v) {
  require(a.size() == v.size(), "e2lsh_hash: dimension mismatch");
  const double h = std::floor((dot(a, v) + b) / r);
  require(std::isfinite(h) && std::abs(h) < kMaxHash, "e2lsh_hash: hash out of range");
  return static_cast<std::int64_t>(h);
}

std::int64_t hash_round(std::span<const double> v, const E2lshParams& params, std::size_t i) {
  require(i < params.num_rounds(), "hash_round: round index out of range");
  require(v.size() == params.dim(), "hash_round: dimension mismatch");
  return e2lsh_hash(params.a.row(i), params.b[i], params.r, v);
}

BigInt HashKey::literal(std::uint32_t base) const {
  BigInt total = 0;
  BigInt weight = 1;
  for (std::int64_t h : per_round) {
    total += weight * h;
    weight *= base;
  }
  return total;
}

HashKey hash_combined(std::span<const double> v, const E2lshParams& params) {
  require(v.size() == params.dim(), "hash_combined: dimension mismatch");
  HashKey key;
  key.per_round.reserve(params.num_rounds());
  for (std::size_t i = 0; i < params.num_rounds(); ++i)
    key.per_round.push_back(e2lsh_hash(params.a.row(i), params.b[i], params.r, v));
  return key;
}

double estimate_collision_rate(double distance, std::size_t dim, const E2lshParams& family,
                               std::size_t trials) {
  require(std::isfinite(distance) && distance >= 0.0,
          "estimate_collision_rate: distance must be >= 0");
  require(trials >= 1, "estimate_collision_rate: trials must be >= 1");
  require(dim >= 1, "estimate_collision_rate: dim must be >= 1");

  std::size_t hits = 0;
  std::vector<double> x(dim), y(dim), u(dim);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto params =
        sample_params(derive_seed(family.seed, {t, 0}), family.num_rounds(), dim, family.r,
                      family.base);
    std::mt19937_64 rng(derive_seed(family.seed, {t, 1}));
    std::normal_distribution<double> normal(0.0, 1.0);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        x[j] = normal(rng);
        u[j] = normal(rng);
        norm += u[j] * u[j];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < dim; ++j) y[j] = x[j] + distance * u[j] / norm;
    if (hash_combined(x, params) == hash_combined(y, params)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace act
