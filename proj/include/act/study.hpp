// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "act/attention.hpp"
#include "act/encoder.hpp"
#include "act/synthetic.hpp"

namespace act {

/// CSV number rendering: 9 significant digits, '.' decimal point, no locale.
std::string format_real(double v);

/// The fixed Gaussian-mixture suite used for the (r, L) trend and the K-means
/// comparison: 8 blobs, N = M = 256, D = 32.
SyntheticSpec mixture_suite();

/// Self-attention inputs on x (Q = K = V = x).
AttentionInputs self_attention_inputs(const FeatureMatrix& x);

// ---------------------------------------------------------------------------
// (r, L) sweep

struct SweepConfig {
  std::vector<double> r_values;
  std::vector<std::size_t> rounds_values;
  std::vector<ClusterMode> modes;
  std::vector<std::uint64_t> seeds;
  /// Synthetic data is regenerated per seed; a file is used as-is for every seed.
  std::variant<SyntheticSpec, std::filesystem::path> data = SyntheticSpec{};
  std::uint32_t base = 4;
  bool literal_eq2 = false;

  void validate() const;
};

struct SweepRow {
  double r = 0.0;
  std::size_t rounds = 0;
  ClusterMode mode = ClusterMode::Queries;
  std::uint64_t seed = 0;
  std::size_t query_clusters = 0;
  std::size_t key_clusters = 0;
  double mse = 0.0;
  std::uint64_t flops_act_total = 0;
  std::uint64_t flops_exact_total = 0;
};

/// Features used for one sweep seed.
FeatureMatrix sweep_features(const SweepConfig& cfg, std::uint64_t seed);

/// One row per (r, L, mode, seed), in that nesting order (r outermost).
/// Each point runs self-attention on the seed's features with hash seed = seed.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Closed-form FLOPs of a sweep row, recomputed from its own C and L.
std::uint64_t recompute_flops(const SweepRow& row, std::size_t n, std::size_t m,
                              std::size_t d_k, std::size_t d_v);

// ---------------------------------------------------------------------------
// Encoder prototype-ratio study

struct EncoderStudyConfig {
  std::size_t num_layers = 6;
  HeadSpec heads = HeadSpec::split(8, 64);
  std::size_t d_ffn = 128;
  std::size_t grid_height = 32;
  std::size_t grid_width = 32;
  /// Token features; num_tokens and dim are taken from the grid and d_model.
  SyntheticSpec data;
  AttentionChoice attention = ActConfig{};
  std::vector<std::uint64_t> seeds;
  bool add_pos = true;
  bool record_mse = false;

  void validate() const;
};

struct EncoderStudyRow {
  std::size_t layer = 0;
  double mean_ratio = 0.0;
  double mean_query_clusters = 0.0;
  double mean_flops = 0.0;  ///< per head
  std::optional<double> mean_mse;
  std::size_t num_seeds = 0;
};

struct EncoderStudy {
  std::vector<EncoderStudyRow> rows;
  /// ratio[s][l]: mean-over-heads prototype ratio of layer l for seed s.
  std::vector<std::vector<double>> ratio;
};

/// Per seed s: weights from init_layers(derive_seed(s, {0})), features from
/// data with seed derive_seed(s, {1}), ACT master seed derive_seed(cfg seed, {s}).
EncoderStudy run_encoder_study(const EncoderStudyConfig& cfg);

/// Features that grow more alike with depth: 8 blobs of norm 8 on a 16 x 16
/// grid, d_model 64 over 8 heads, 40% pull toward the token mean before
/// every layer, positional encoding off, ACT r = 8, L = 24.
EncoderStudyConfig homogenizing_encoder_study(std::vector<std::uint64_t> seeds);

std::string encoder_study_csv(const EncoderStudy& study);

// ---------------------------------------------------------------------------
// ACT vs K-means at matched FLOPs

struct KMeansComparisonRow {
  std::uint64_t seed = 0;
  std::size_t act_query_clusters = 0;
  std::uint64_t act_flops = 0;
  double act_mse = 0.0;
  std::size_t kmeans_requested = 0;
  std::size_t kmeans_effective = 0;
  std::size_t kmeans_iterations = 0;
  std::uint64_t kmeans_flops = 0;
  double kmeans_mse = 0.0;

  double flops_ratio() const {
    return static_cast<double>(kmeans_flops) / static_cast<double>(act_flops);
  }
};

/// For every seed, runs ACT (query mode) on the seed's features, then picks
/// the K-means cluster count whose measured FLOPs land closest to ACT's.
std::vector<KMeansComparisonRow> compare_kmeans(const SyntheticSpec& data, const ActConfig& act,
                                                const std::vector<std::uint64_t>& seeds,
                                                std::size_t kmeans_iters = 10);

std::string kmeans_comparison_csv(const std::vector<KMeansComparisonRow>& rows);

}  // namespace act
