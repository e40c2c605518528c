// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "act/matrix.hpp"

namespace act {

/// Analytic FLOP count broken into labelled terms.
///
/// Conventions: a multiply-accumulate is 2 FLOPs; softmax is 5 FLOPs per
/// entry (max compare, subtract, exp, accumulate, divide); hashing counts the
/// projection dot products only; gathers and floors are free.
struct FlopsReport {
  struct Term {
    std::string label;
    std::uint64_t count = 0;
    friend bool operator==(const Term&, const Term&) = default;
  };
  std::vector<Term> terms;

  void add(std::string label, std::uint64_t count) { terms.push_back({std::move(label), count}); }

  std::uint64_t total() const;

  /// Count for a label, 0 if absent.
  std::uint64_t term(const std::string& label) const;

  friend bool operator==(const FlopsReport&, const FlopsReport&) = default;
};

/// Dense attention: logits 2NMDk, softmax 5NM, weighted sum 2NMDv.
FlopsReport flops_exact(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v);

/// Query clustering: hashing 2NLDk, prototype averaging NDk, then dense
/// attention over C_q prototypes; broadcast is free.
FlopsReport flops_act(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                      std::size_t rounds, std::size_t query_clusters);

/// Key clustering: hashing 2MLDk, key and value averaging M(Dk + Dv), a
/// log-size bias per logit, and dense attention against C_k key prototypes.
FlopsReport flops_act_keys(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                           std::size_t rounds, std::size_t key_clusters);

/// Both sides clustered: attention between C_q and C_k prototypes.
FlopsReport flops_act_both(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                           std::size_t query_rounds, std::size_t key_rounds,
                           std::size_t query_clusters, std::size_t key_clusters);

/// K-means query clustering baseline. Each Lloyd iteration costs 3NCDk for
/// squared distances to all requested centroids plus NDk for the mean update;
/// attention then runs over the surviving clusters.
FlopsReport flops_kmeans(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                         std::size_t requested_clusters, std::size_t effective_clusters,
                         std::size_t iterations);

/// Mean squared difference over all entries of two equally shaped maps.
double attention_mse(const FeatureMatrix& estimated, const FeatureMatrix& exact);

/// Boxes as (center-x, center-y, width, height) in normalized units.
struct BoxSet {
  std::vector<std::array<double, 4>> boxes;

  /// Throws ContractError on negative extents or non-finite values.
  void validate() const;
};

/// Box-distillation loss: squared L2 distance averaged over every coordinate.
double kd_loss(const BoxSet& student, const BoxSet& teacher);

/// C / N per entry of (C, N) pairs.
std::vector<double> prototype_ratio(
    const std::vector<std::pair<std::size_t, std::size_t>>& per_layer_counts);

}  // namespace act
