// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "act/matrix.hpp"

namespace act {

/// Query/key/value triple for one attention call.
/// q is N x Dk, k is M x Dk, v is M x Dv.
struct AttentionInputs {
  FeatureMatrix q;
  FeatureMatrix k;
  FeatureMatrix v;

  std::size_t num_queries() const { return q.rows(); }
  std::size_t num_keys() const { return k.rows(); }
  std::size_t key_dim() const { return q.cols(); }
  std::size_t value_dim() const { return v.cols(); }

  /// Throws ContractError if the shapes are inconsistent or a matrix is empty.
  void validate() const;
};

struct HeadSpec {
  std::size_t num_heads = 8;
  std::size_t d_model = 256;
  std::size_t d_k = 32;
  std::size_t d_v = 32;

  /// Even split of d_model across heads, d_k = d_v.
  static HeadSpec split(std::size_t num_heads, std::size_t d_model);

  void validate() const;
};

/// Projection weights of one multi-head attention block. Each is d_model x d_model
/// and applied on the right (x * W). Columns [h*d_k, (h+1)*d_k) belong to head h.
struct MultiHeadWeights {
  FeatureMatrix wq;
  FeatureMatrix wk;
  FeatureMatrix wv;
  FeatureMatrix wo;

  static MultiHeadWeights identity(std::size_t d_model);
  void validate(const HeadSpec& spec) const;
};

/// Row-wise softmax with max subtraction. Rejects an empty matrix.
FeatureMatrix softmax_rows(const FeatureMatrix& m);

/// softmax(Q K^T / sqrt(Dk)), the N x M attention map.
FeatureMatrix exact_attention_map(const AttentionInputs& in);

/// softmax(Q K^T / sqrt(Dk)) V.
FeatureMatrix exact_attention(const AttentionInputs& in);

/// Splits projected features into per-head triples. Queries come from
/// query_src, keys from key_src and values from value_src (all N x d_model).
std::vector<AttentionInputs> project_heads(const FeatureMatrix& query_src,
                                           const FeatureMatrix& key_src,
                                           const FeatureMatrix& value_src,
                                           const HeadSpec& spec,
                                           const MultiHeadWeights& w);

/// Self-attention form: x feeds queries, keys and values.
std::vector<AttentionInputs> project_heads(const FeatureMatrix& x, const HeadSpec& spec,
                                           const MultiHeadWeights& w);

/// Concatenates per-head outputs and applies the output projection.
FeatureMatrix merge_heads(std::span<const FeatureMatrix> head_outputs,
                          const MultiHeadWeights& w);

/// Dense multi-head attention (the reference for the ACT multi-head path).
FeatureMatrix exact_multihead(const FeatureMatrix& x, const HeadSpec& spec,
                              const MultiHeadWeights& w);

}  // namespace act
