// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "act/e2lsh.hpp"
#include "act/matrix.hpp"

namespace act {

/// Partition of N tokens into C nonempty clusters.
///
/// Labels are canonical: cluster 0 is the cluster of token 0, and each new
/// label is introduced in token order. Two assignments describing the same
/// partition of the same token sequence therefore compare equal.
class ClusterAssignment {
 public:
  ClusterAssignment() = default;

  /// Relabels arbitrary integer labels canonically by first occurrence.
  static ClusterAssignment from_labels(std::span<const std::int64_t> raw);

  std::size_t num_tokens() const { return labels_.size(); }
  std::size_t num_clusters() const { return sizes_.size(); }
  std::span<const std::uint32_t> labels() const { return labels_; }
  std::uint32_t label(std::size_t i) const { return labels_[i]; }
  std::span<const std::size_t> sizes() const { return sizes_; }

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;

 private:
  std::vector<std::uint32_t> labels_;
  std::vector<std::size_t> sizes_;
};

/// Cluster means, one row per cluster, with the member count of each.
struct PrototypeSet {
  FeatureMatrix p;
  std::vector<std::size_t> sizes;
};

/// Groups rows whose full per-round hash tuples agree. When literal is set the
/// grouping key is the combined integer sum_i B^i h_i instead, which can merge
/// distinct tuples.
ClusterAssignment assign_by_hash(const FeatureMatrix& x, const E2lshParams& params,
                                 bool literal = false);

/// Arithmetic mean of each cluster's rows.
PrototypeSet compute_prototypes(const FeatureMatrix& x, const ClusterAssignment& asg);

/// Copies prototype row G_i into output row i.
FeatureMatrix broadcast(const FeatureMatrix& per_cluster, const ClusterAssignment& asg);

struct KMeansResult {
  ClusterAssignment assignment;
  PrototypeSet prototypes;
  std::size_t requested_clusters = 0;
  std::size_t iterations_run = 0;
  /// Sum of squared distances to the cluster means after each assignment step.
  std::vector<double> objective;
};

/// Lloyd's algorithm from `clusters` distinct rows picked uniformly at random.
///
/// Runs exactly `iters` assignment/update rounds, so the cost depends on
/// (N, C, D, iters) alone. A centroid whose cluster empties keeps its
/// position; clusters that are empty at the end are dropped, so the result may
/// hold fewer than `clusters` prototypes. The returned prototypes are the means of the final
/// assignment.
KMeansResult kmeans(const FeatureMatrix& x, std::size_t clusters, std::size_t iters,
                    std::uint64_t seed);

}  // namespace act
