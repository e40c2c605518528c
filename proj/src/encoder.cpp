// SPDX-License-Identifier: Apache-2.0
#include "act/encoder.hpp"

#include <cmath>
#include <random>

#include "act/seed.hpp"

namespace act {

FeatureMatrix sinusoidal_pos_encoding(std::size_t height, std::size_t width,
                                      std::size_t d_model) {
  require(height >= 1 && width >= 1, "sinusoidal_pos_encoding: empty grid");
  require(d_model >= 4 && d_model % 4 == 0,
          "sinusoidal_pos_encoding: d_model must be a positive multiple of 4");
  const std::size_t half = d_model / 2;
  std::vector<double> inv_freq(half / 2);
  for (std::size_t j = 0; j < inv_freq.size(); ++j)
    inv_freq[j] = std::pow(10000.0, -static_cast<double>(2 * j) / static_cast<double>(half));

  FeatureMatrix out(height * width, d_model);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      auto row = out.row(y * width + x);
      for (std::size_t j = 0; j < inv_freq.size(); ++j) {
        const double ay = static_cast<double>(y) * inv_freq[j];
        const double ax = static_cast<double>(x) * inv_freq[j];
        row[2 * j] = std::sin(ay);
        row[2 * j + 1] = std::cos(ay);
        row[half + 2 * j] = std::sin(ax);
        row[half + 2 * j + 1] = std::cos(ax);
      }
    }
  return out;
}

void EncoderLayerParams::validate(const HeadSpec& spec) const {
  attn.validate(spec);
  require(ffn_in.rows() == spec.d_model && ffn_out.cols() == spec.d_model &&
              ffn_in.cols() == ffn_out.rows(),
          "EncoderLayerParams: FFN shapes inconsistent with d_model");
  for (const auto* v : {&norm1_scale, &norm1_shift, &norm2_scale, &norm2_shift})
    require(v->size() == spec.d_model, "EncoderLayerParams: norm parameters must have d_model entries");
}

std::vector<EncoderLayerParams> init_layers(std::uint64_t seed, std::size_t num_layers,
                                            const HeadSpec& spec, std::size_t d_ffn) {
  require(num_layers >= 1, "init_layers: need at least one layer");
  require(d_ffn >= 1, "init_layers: d_ffn must be >= 1");
  spec.validate();

  // Normal with std 1/sqrt(d_model), redrawn beyond 3 std.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d_model));
  auto random = [&](std::size_t r, std::size_t c) {
    FeatureMatrix m(r, c);
    for (double& v : m.values()) {
      double z = normal(rng);
      while (std::abs(z) > 3.0) z = normal(rng);
      v = z * scale;
    }
    return m;
  };

  const std::size_t d = spec.d_model;
  std::vector<EncoderLayerParams> layers;
  layers.reserve(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    EncoderLayerParams p;
    p.attn.wq = random(d, d);
    p.attn.wk = random(d, d);
    p.attn.wv = random(d, d);
    p.attn.wo = random(d, d);
    p.ffn_in = random(d, d_ffn);
    p.ffn_out = random(d_ffn, d);
    p.norm1_scale.assign(d, 1.0);
    p.norm1_shift.assign(d, 0.0);
    p.norm2_scale.assign(d, 1.0);
    p.norm2_shift.assign(d, 0.0);
    layers.push_back(std::move(p));
  }
  return layers;
}

FeatureMatrix layer_norm(const FeatureMatrix& x, std::span<const double> scale,
                         std::span<const double> shift, double eps) {
  require(scale.size() == x.cols() && shift.size() == x.cols(), "layer_norm: parameter size");
  FeatureMatrix out = x;
  const double d = static_cast<double>(x.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= d;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= d;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = (row[j] - mean) * inv * scale[j] + shift[j];
  }
  return out;
}

double LayerStats::mean_prototype_ratio() const {
  if (heads.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& h : heads)
    sum += static_cast<double>(h.num_query_clusters) / static_cast<double>(h.num_queries);
  return sum / static_cast<double>(heads.size());
}

namespace {

FeatureMatrix mix_toward_mean(const FeatureMatrix& x, double mixing) {
  std::vector<double> mean(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += x(i, j);
  for (double& m : mean) m /= static_cast<double>(x.rows());
  FeatureMatrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      out(i, j) = (1.0 - mixing) * x(i, j) + mixing * mean[j];
  return out;
}

FeatureMatrix feed_forward(const FeatureMatrix& x, const EncoderLayerParams& p) {
  FeatureMatrix hidden = matmul(x, p.ffn_in);
  for (double& v : hidden.values()) v = v > 0.0 ? v : 0.0;
  return matmul(hidden, p.ffn_out);
}

}  // namespace

EncoderResult encoder_forward(const FeatureMatrix& x, const FeatureMatrix& pos,
                              std::span<const EncoderLayerParams> layers,
                              const AttentionChoice& attn, const EncoderOptions& opts) {
  require(!layers.empty(), "encoder_forward: no layers");
  require(x.rows() == pos.rows() && x.cols() == pos.cols(),
          "encoder_forward: input and positional encoding shapes differ");
  require(x.cols() == opts.heads.d_model, "encoder_forward: input width != d_model");
  require(opts.mixing >= 0.0 && opts.mixing <= 1.0, "encoder_forward: mixing must be in [0, 1]");
  for (const auto& l : layers) l.validate(opts.heads);

  const auto* act_cfg = std::get_if<ActConfig>(&attn);
  EncoderResult res;
  FeatureMatrix h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& p = layers[l];
    if (opts.mixing > 0.0) h = mix_toward_mean(h, opts.mixing);
    const FeatureMatrix qk = opts.add_pos ? add(h, pos) : h;

    LayerStats stats;
    stats.layer_index = l;
    FeatureMatrix attended;
    if (act_cfg != nullptr) {
      ActConfig layer_cfg = *act_cfg;
      layer_cfg.seed = derive_seed(act_cfg->seed, {l});
      auto mh = act_multihead(qk, qk, h, opts.heads, p.attn, layer_cfg, opts.record_mse);
      attended = std::move(mh.out);
      stats.heads = std::move(mh.heads);
    } else {
      const auto heads = project_heads(qk, qk, h, opts.heads, p.attn);
      std::vector<FeatureMatrix> outs;
      for (const auto& head : heads) {
        outs.push_back(exact_attention(head));
        stats.heads.push_back({head.num_queries(), 0, head.num_queries(),
                               flops_exact(head.num_queries(), head.num_keys(), head.key_dim(),
                                           head.value_dim()),
                               opts.record_mse ? std::optional<double>(0.0) : std::nullopt});
      }
      attended = merge_heads(outs, p.attn);
    }

    h = layer_norm(add(h, attended), p.norm1_scale, p.norm1_shift);
    h = layer_norm(add(h, feed_forward(h, p)), p.norm2_scale, p.norm2_shift);
    res.layers.push_back(std::move(stats));
  }
  res.out = std::move(h);
  return res;
}

}  // namespace act
