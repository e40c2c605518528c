// SPDX-License-Identifier: Apache-2.0
#include "act/core.hpp"

#include <algorithm>
#include <cmath>

namespace act {

void AttentionInputs::validate() const {
  require(!q.empty() && !k.empty() && !v.empty(), "attention: empty input matrix");
  require(q.cols() == k.cols(), "attention: query and key dimensions differ");
  require(k.rows() == v.rows(), "attention: key and value counts differ");
}

HeadSpec HeadSpec::split(std::size_t num_heads, std::size_t d_model) {
  require(num_heads >= 1 && d_model % num_heads == 0,
          "HeadSpec: d_model must be divisible by num_heads");
  const std::size_t d = d_model / num_heads;
  return {num_heads, d_model, d, d};
}

void HeadSpec::validate() const {
  require(num_heads >= 1 && d_model >= 1 && d_k >= 1 && d_v >= 1,
          "HeadSpec: dimensions must be positive");
  require(num_heads * d_k <= d_model && num_heads * d_v <= d_model,
          "HeadSpec: heads exceed d_model");
}

MultiHeadWeights MultiHeadWeights::identity(std::size_t d_model) {
  auto eye = act::identity(d_model);
  return {eye, eye, eye, eye};
}

void MultiHeadWeights::validate(const HeadSpec& spec) const {
  for (const auto* m : {&wq, &wk, &wv, &wo})
    require(m->rows() == spec.d_model && m->cols() == spec.d_model,
            "MultiHeadWeights: projections must be d_model x d_model");
}

FeatureMatrix softmax_rows(const FeatureMatrix& m) {
  require(!m.empty(), "softmax_rows: empty matrix");
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& x : row) {
      x = std::exp(x - mx);
      sum += x;
    }
    for (double& x : row) x /= sum;
  }
  return out;
}

FeatureMatrix exact_attention_map(const AttentionInputs& in) {
  in.validate();
  FeatureMatrix logits = matmul_transposed(in.q, in.k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.key_dim()));
  for (double& x : logits.values()) x *= scale;
  return softmax_rows(logits);
}

FeatureMatrix exact_attention(const AttentionInputs& in) {
  return matmul(exact_attention_map(in), in.v);
}

std::vector<AttentionInputs> project_heads(const FeatureMatrix& query_src,
                                           const FeatureMatrix& key_src,
                                           const FeatureMatrix& value_src,
                                           const HeadSpec& spec,
                                           const MultiHeadWeights& w) {
  spec.validate();
  w.validate(spec);
  for (const auto* x : {&query_src, &key_src, &value_src})
    require(x->cols() == spec.d_model, "project_heads: input width != d_model");
  require(key_src.rows() == value_src.rows(), "project_heads: key and value counts differ");

  const FeatureMatrix q = matmul(query_src, w.wq);
  const FeatureMatrix k = matmul(key_src, w.wk);
  const FeatureMatrix v = matmul(value_src, w.wv);

  std::vector<AttentionInputs> heads;
  heads.reserve(spec.num_heads);
  for (std::size_t h = 0; h < spec.num_heads; ++h) {
    heads.push_back({q.col_block(h * spec.d_k, spec.d_k), k.col_block(h * spec.d_k, spec.d_k),
                     v.col_block(h * spec.d_v, spec.d_v)});
  }
  return heads;
}

std::vector<AttentionInputs> project_heads(const FeatureMatrix& x, const HeadSpec& spec,
                                           const MultiHeadWeights& w) {
  return project_heads(x, x, x, spec, w);
}

FeatureMatrix merge_heads(std::span<const FeatureMatrix> head_outputs,
                          const MultiHeadWeights& w) {
  FeatureMatrix cat = hconcat(head_outputs);
  require(cat.cols() == w.wo.rows(), "merge_heads: concatenated width != d_model");
  return matmul(cat, w.wo);
}

FeatureMatrix exact_multihead(const FeatureMatrix& x, const HeadSpec& spec,
                              const MultiHeadWeights& w) {
  std::vector<FeatureMatrix> outs;
  for (const auto& head : project_heads(x, spec, w)) outs.push_back(exact_attention(head));
  return merge_heads(outs, w);
}

}  // namespace act
