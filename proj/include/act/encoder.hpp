// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "act/attention.hpp"
#include "act/core.hpp"

namespace act {

/// 2D sine/cosine positional encoding for an H x W grid flattened row-major
/// (token index y * W + x). The first d_model/2 columns encode y, the rest x;
/// within each half column 2j holds sin(p / 10000^(2j / (d_model/2))) and
/// column 2j+1 the matching cosine. Positions are raw integer coordinates.
FeatureMatrix sinusoidal_pos_encoding(std::size_t height, std::size_t width,
                                      std::size_t d_model);

struct EncoderLayerParams {
  MultiHeadWeights attn;
  FeatureMatrix ffn_in;   ///< d_model x d_ffn
  FeatureMatrix ffn_out;  ///< d_ffn x d_model
  std::vector<double> norm1_scale, norm1_shift;
  std::vector<double> norm2_scale, norm2_shift;

  void validate(const HeadSpec& spec) const;
};

/// Random layers with N(0, 1/d_model) weights truncated at 3 standard
/// deviations, unit norm scale and zero shift.
std::vector<EncoderLayerParams> init_layers(std::uint64_t seed, std::size_t num_layers,
                                            const HeadSpec& spec, std::size_t d_ffn);

/// Row-wise layer normalization followed by an affine scale/shift.
FeatureMatrix layer_norm(const FeatureMatrix& x, std::span<const double> scale,
                         std::span<const double> shift, double eps = 1e-9);

struct ExactAttention {};
using AttentionChoice = std::variant<ExactAttention, ActConfig>;

struct EncoderOptions {
  HeadSpec heads;
  /// Add the positional encoding to the query and key inputs of every layer.
  bool add_pos = true;
  /// Before each layer, pull every token toward the token mean:
  /// x <- (1 - mixing) x + mixing * mean(x). 0 disables.
  double mixing = 0.0;
  /// Record per-head attention-map MSE against the exact map (ACT only).
  bool record_mse = false;
};

struct LayerStats {
  std::size_t layer_index = 0;
  std::vector<HeadStats> heads;

  double mean_prototype_ratio() const;
};

struct EncoderResult {
  FeatureMatrix out;
  std::vector<LayerStats> layers;
};

/// Post-norm encoder: attention, add, norm, FFN (ReLU), add, norm.
/// Under ACT, layer l uses hash seed derive_seed(cfg.seed, {l}).
EncoderResult encoder_forward(const FeatureMatrix& x, const FeatureMatrix& pos,
                              std::span<const EncoderLayerParams> layers,
                              const AttentionChoice& attn, const EncoderOptions& opts);

}  // namespace act
