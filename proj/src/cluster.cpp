// SPDX-License-Identifier: Apache-2.0
#include "act/cluster.hpp"

#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

namespace act {

ClusterAssignment ClusterAssignment::from_labels(std::span<const std::int64_t> raw) {
  require(!raw.empty(), "ClusterAssignment: no tokens");
  ClusterAssignment out;
  out.labels_.reserve(raw.size());
  std::unordered_map<std::int64_t, std::uint32_t> canon;
  for (std::int64_t r : raw) {
    auto [it, inserted] = canon.try_emplace(r, static_cast<std::uint32_t>(canon.size()));
    if (inserted) out.sizes_.push_back(0);
    out.labels_.push_back(it->second);
    ++out.sizes_[it->second];
  }
  return out;
}

namespace {

template <typename Key>
ClusterAssignment group_by_key(const std::vector<Key>& keys) {
  std::map<Key, std::int64_t> index;
  std::vector<std::int64_t> raw;
  raw.reserve(keys.size());
  for (const auto& k : keys) {
    auto [it, inserted] = index.try_emplace(k, static_cast<std::int64_t>(index.size()));
    raw.push_back(it->second);
  }
  return ClusterAssignment::from_labels(raw);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

ClusterAssignment assign_by_hash(const FeatureMatrix& x, const E2lshParams& params,
                                 bool literal) {
  require(!x.empty(), "assign_by_hash: empty input");
  require(x.cols() == params.dim(), "assign_by_hash: feature dimension != hash dimension");
  std::vector<HashKey> keys;
  keys.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) keys.push_back(hash_combined(x.row(i), params));
  if (!literal) return group_by_key(keys);

  std::vector<BigInt> combined;
  combined.reserve(keys.size());
  for (const auto& k : keys) combined.push_back(k.literal(params.base));
  return group_by_key(combined);
}

PrototypeSet compute_prototypes(const FeatureMatrix& x, const ClusterAssignment& asg) {
  require(!x.empty() && asg.num_tokens() == x.rows(),
          "compute_prototypes: assignment does not match rows");
  FeatureMatrix sums(asg.num_clusters(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto dst = sums.row(asg.label(i));
    auto src = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += src[j];
  }
  std::vector<std::size_t> sizes(asg.sizes().begin(), asg.sizes().end());
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double n = static_cast<double>(sizes[c]);
    for (double& v : sums.row(c)) v /= n;
  }
  return {std::move(sums), std::move(sizes)};
}

FeatureMatrix broadcast(const FeatureMatrix& per_cluster, const ClusterAssignment& asg) {
  require(per_cluster.rows() == asg.num_clusters(), "broadcast: cluster count mismatch");
  FeatureMatrix out(asg.num_tokens(), per_cluster.cols());
  for (std::size_t i = 0; i < asg.num_tokens(); ++i) {
    auto src = per_cluster.row(asg.label(i));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

KMeansResult kmeans(const FeatureMatrix& x, std::size_t clusters, std::size_t iters,
                    std::uint64_t seed) {
  require(!x.empty(), "kmeans: empty input");
  require(clusters >= 1 && clusters <= x.rows(), "kmeans: cluster count must be in [1, N]");
  require(iters >= 1, "kmeans: iters must be >= 1");

  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  // Partial Fisher-Yates: the first `clusters` entries are a uniform sample.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < clusters; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  FeatureMatrix centroids(clusters, d);
  for (std::size_t c = 0; c < clusters; ++c) {
    auto src = x.row(order[c]);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
  }

  KMeansResult result;
  result.requested_clusters = clusters;
  std::vector<std::int64_t> labels(n, -1);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::int64_t arg = 0;
      for (std::size_t c = 0; c < clusters; ++c) {
        const double dist = squared_distance(x.row(i), centroids.row(c));
        if (dist < best) {
          best = dist;
          arg = static_cast<std::int64_t>(c);
        }
      }
      labels[i] = arg;
    }

    FeatureMatrix sums(clusters, d);
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(static_cast<std::size_t>(labels[i]));
      auto src = x.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;
      auto dst = centroids.row(c);
      auto src = sums.row(c);
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] / static_cast<double>(counts[c]);
    }
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      objective += squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
    result.objective.push_back(objective);
    result.iterations_run = it + 1;
  }

  result.assignment = ClusterAssignment::from_labels(labels);
  result.prototypes = compute_prototypes(x, result.assignment);
  return result;
}

}  // namespace act
