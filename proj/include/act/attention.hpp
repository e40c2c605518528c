// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "act/analysis.hpp"
#include "act/cluster.hpp"
#include "act/core.hpp"

namespace act {

/// Which side of the attention product is replaced by hash-bucket prototypes.
enum class ClusterMode { Queries, Keys, Both };

std::string_view to_string(ClusterMode mode);

/// Parses "queries", "keys" or "both"; throws ContractError otherwise.
ClusterMode parse_cluster_mode(std::string_view name);

struct ActConfig {
  double r = 8.0;
  std::size_t rounds = 24;
  /// Hash rounds for key clustering; 0 means "same as rounds".
  std::size_t key_rounds = 0;
  std::uint32_t base = 4;
  ClusterMode mode = ClusterMode::Queries;
  std::uint64_t seed = 0;
  /// Group by the combined integer sum_i B^i h_i rather than the hash tuple.
  bool literal_eq2 = false;
  /// Multi-head only: cluster the pre-projection query features once and
  /// share the partition across heads.
  bool shared_query_clustering = false;

  std::size_t effective_key_rounds() const { return key_rounds == 0 ? rounds : key_rounds; }
  bool clusters_queries() const { return mode != ClusterMode::Keys; }
  bool clusters_keys() const { return mode != ClusterMode::Queries; }

  void validate() const;
};

/// Hash family used for query clustering under cfg, for feature dimension dim.
E2lshParams query_hash_params(const ActConfig& cfg, std::size_t dim);
/// Hash family used for key clustering under cfg.
E2lshParams key_hash_params(const ActConfig& cfg, std::size_t dim);

struct ActOutput {
  FeatureMatrix out;                   ///< N x Dv estimate.
  std::size_t num_query_clusters = 0;  ///< C_q, 0 when queries are not clustered.
  std::size_t num_key_clusters = 0;    ///< C_k, 0 when keys are not clustered.
  FlopsReport flops;
};

/// Clustered attention estimate.
///
/// Queries mode: prototypes P (cluster means of Q) attend to all keys,
/// softmax(P K^T / sqrt(Dk)) V is computed per cluster and gathered back to
/// every member query.
///
/// Keys mode: keys and values are replaced by per-cluster means and each
/// prototype logit is offset by ln(cluster size), so a cluster contributes
/// size * exp(q . p) to the normalizer. Exact when every cluster is a
/// singleton or holds identical keys.
///
/// Both: key clustering applied to query prototypes, then broadcast.
ActOutput act_attention(const AttentionInputs& in, const ActConfig& cfg);

/// Same, with a caller-supplied query partition (used for shared clustering).
ActOutput act_attention(const AttentionInputs& in, const ActConfig& cfg,
                        const ClusterAssignment& query_clusters);

/// The N x M map the estimator implicitly uses: row i is the prototype row of
/// G_i; in keys mode a cluster's mass is split evenly across its keys.
FeatureMatrix estimated_attention_map(const AttentionInputs& in, const ActConfig& cfg);
FeatureMatrix estimated_attention_map(const AttentionInputs& in, const ActConfig& cfg,
                                      const ClusterAssignment& query_clusters);

/// K-means baseline: the query partition comes from Lloyd's algorithm on Q
/// rather than hashing. flops is flops_kmeans over the iterations actually run.
struct KMeansAttention {
  ActOutput output;
  FeatureMatrix map;  ///< N x M broadcast attention map
  std::size_t requested_clusters = 0;
  std::size_t iterations_run = 0;
};

KMeansAttention kmeans_attention(const AttentionInputs& in, std::size_t clusters,
                                 std::size_t iters, std::uint64_t seed);

/// Per-head clustering statistics from a multi-head call.
struct HeadStats {
  std::size_t num_query_clusters = 0;
  std::size_t num_key_clusters = 0;
  std::size_t num_queries = 0;
  FlopsReport flops;
  std::optional<double> map_mse;  ///< vs the exact map, when requested
};

struct MultiHeadResult {
  FeatureMatrix out;
  std::vector<HeadStats> heads;
};

/// Seed of head h's hash families, derived from the block seed.
std::uint64_t head_seed(std::uint64_t block_seed, std::size_t head);

/// Multi-head ACT. Each head gets its own hash family (see head_seed) unless
/// cfg.shared_query_clustering is set.
MultiHeadResult act_multihead(const FeatureMatrix& query_src, const FeatureMatrix& key_src,
                              const FeatureMatrix& value_src, const HeadSpec& spec,
                              const MultiHeadWeights& w, const ActConfig& cfg,
                              bool with_map_mse = false);

FeatureMatrix act_multihead(const FeatureMatrix& x, const HeadSpec& spec,
                            const MultiHeadWeights& w, const ActConfig& cfg);

}  // namespace act
