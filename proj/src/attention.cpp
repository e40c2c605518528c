// SPDX-License-Identifier: Apache-2.0
#include "act/attention.hpp"

#include <cmath>

#include "act/seed.hpp"

namespace act {

std::string_view to_string(ClusterMode mode) {
  switch (mode) {
    case ClusterMode::Queries: return "queries";
    case ClusterMode::Keys: return "keys";
    case ClusterMode::Both: return "both";
  }
  throw ContractError("unknown cluster mode");
}

ClusterMode parse_cluster_mode(std::string_view name) {
  if (name == "queries") return ClusterMode::Queries;
  if (name == "keys") return ClusterMode::Keys;
  if (name == "both") return ClusterMode::Both;
  throw ContractError("unknown cluster mode '" + std::string(name) +
                      "' (expected queries, keys or both)");
}

void ActConfig::validate() const {
  require(std::isfinite(r) && r > 0.0, "ActConfig: r must be positive");
  require(rounds >= 1, "ActConfig: rounds must be >= 1");
  require(base >= 2, "ActConfig: base must be >= 2");
  require(mode == ClusterMode::Queries || mode == ClusterMode::Keys || mode == ClusterMode::Both,
          "ActConfig: invalid mode");
}

E2lshParams query_hash_params(const ActConfig& cfg, std::size_t dim) {
  return sample_params(derive_seed(cfg.seed, {0}), cfg.rounds, dim, cfg.r, cfg.base);
}

E2lshParams key_hash_params(const ActConfig& cfg, std::size_t dim) {
  return sample_params(derive_seed(cfg.seed, {1}), cfg.effective_key_rounds(), dim, cfg.r,
                       cfg.base);
}

std::uint64_t head_seed(std::uint64_t block_seed, std::size_t head) {
  return derive_seed(block_seed, {2, head});
}

namespace {

// Cluster-level quantities shared by the output and the expanded map.
struct Estimate {
  std::optional<ClusterAssignment> query_clusters;
  std::optional<ClusterAssignment> key_clusters;
  FeatureMatrix weights;  // rows: query prototypes (or queries); cols: key prototypes (or keys)
  FeatureMatrix values;   // per-column value rows
};

Estimate estimate(const AttentionInputs& in, const ActConfig& cfg,
                  const ClusterAssignment* given_query_clusters) {
  in.validate();
  cfg.validate();

  Estimate est;
  FeatureMatrix queries = in.q;
  if (cfg.clusters_queries()) {
    if (given_query_clusters != nullptr) {
      require(given_query_clusters->num_tokens() == in.num_queries(),
              "act_attention: query partition does not match N");
      est.query_clusters = *given_query_clusters;
    } else {
      est.query_clusters =
          assign_by_hash(in.q, query_hash_params(cfg, in.key_dim()), cfg.literal_eq2);
    }
    queries = compute_prototypes(in.q, *est.query_clusters).p;
  }

  FeatureMatrix keys = in.k;
  est.values = in.v;
  std::vector<double> bias;
  if (cfg.clusters_keys()) {
    est.key_clusters = assign_by_hash(in.k, key_hash_params(cfg, in.key_dim()), cfg.literal_eq2);
    auto kp = compute_prototypes(in.k, *est.key_clusters);
    keys = std::move(kp.p);
    est.values = compute_prototypes(in.v, *est.key_clusters).p;
    for (std::size_t s : kp.sizes) bias.push_back(std::log(static_cast<double>(s)));
  }

  FeatureMatrix logits = matmul_transposed(queries, keys);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.key_dim()));
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] *= scale;
      if (!bias.empty()) row[j] += bias[j];
    }
  }
  est.weights = softmax_rows(logits);
  return est;
}

ActOutput finish(const AttentionInputs& in, const ActConfig& cfg, Estimate est) {
  ActOutput res;
  FeatureMatrix per_row = matmul(est.weights, est.values);
  res.out = est.query_clusters ? broadcast(per_row, *est.query_clusters) : std::move(per_row);

  const std::size_t n = in.num_queries(), m = in.num_keys();
  const std::size_t dk = in.key_dim(), dv = in.value_dim();
  res.num_query_clusters = est.query_clusters ? est.query_clusters->num_clusters() : 0;
  res.num_key_clusters = est.key_clusters ? est.key_clusters->num_clusters() : 0;
  switch (cfg.mode) {
    case ClusterMode::Queries:
      res.flops = flops_act(n, m, dk, dv, cfg.rounds, res.num_query_clusters);
      break;
    case ClusterMode::Keys:
      res.flops = flops_act_keys(n, m, dk, dv, cfg.effective_key_rounds(), res.num_key_clusters);
      break;
    case ClusterMode::Both:
      res.flops = flops_act_both(n, m, dk, dv, cfg.rounds, cfg.effective_key_rounds(),
                                 res.num_query_clusters, res.num_key_clusters);
      break;
  }
  return res;
}

}  // namespace

ActOutput act_attention(const AttentionInputs& in, const ActConfig& cfg) {
  return finish(in, cfg, estimate(in, cfg, nullptr));
}

ActOutput act_attention(const AttentionInputs& in, const ActConfig& cfg,
                        const ClusterAssignment& query_clusters) {
  return finish(in, cfg, estimate(in, cfg, &query_clusters));
}

namespace {

FeatureMatrix expand_map(const AttentionInputs& in, Estimate est) {
  FeatureMatrix per_row = std::move(est.weights);
  if (est.key_clusters) {
    const auto& kc = *est.key_clusters;
    FeatureMatrix expanded(per_row.rows(), in.num_keys());
    for (std::size_t i = 0; i < per_row.rows(); ++i)
      for (std::size_t j = 0; j < in.num_keys(); ++j) {
        const std::uint32_t c = kc.label(j);
        expanded(i, j) = per_row(i, c) / static_cast<double>(kc.sizes()[c]);
      }
    per_row = std::move(expanded);
  }
  return est.query_clusters ? broadcast(per_row, *est.query_clusters) : per_row;
}

}  // namespace

FeatureMatrix estimated_attention_map(const AttentionInputs& in, const ActConfig& cfg) {
  return expand_map(in, estimate(in, cfg, nullptr));
}

FeatureMatrix estimated_attention_map(const AttentionInputs& in, const ActConfig& cfg,
                                      const ClusterAssignment& query_clusters) {
  return expand_map(in, estimate(in, cfg, &query_clusters));
}

KMeansAttention kmeans_attention(const AttentionInputs& in, std::size_t clusters,
                                 std::size_t iters, std::uint64_t seed) {
  in.validate();
  const KMeansResult km = kmeans(in.q, clusters, iters, seed);
  ActConfig cfg;  // queries mode; hash fields unused with a given partition
  Estimate est = estimate(in, cfg, &km.assignment);
  FeatureMatrix map = broadcast(est.weights, km.assignment);
  ActOutput out = finish(in, cfg, std::move(est));
  out.flops = flops_kmeans(in.num_queries(), in.num_keys(), in.key_dim(), in.value_dim(),
                           clusters, out.num_query_clusters, km.iterations_run);
  return {std::move(out), std::move(map), clusters, km.iterations_run};
}

MultiHeadResult act_multihead(const FeatureMatrix& query_src, const FeatureMatrix& key_src,
                              const FeatureMatrix& value_src, const HeadSpec& spec,
                              const MultiHeadWeights& w, const ActConfig& cfg,
                              bool with_map_mse) {
  cfg.validate();
  const auto heads = project_heads(query_src, key_src, value_src, spec, w);

  std::optional<ClusterAssignment> shared;
  if (cfg.shared_query_clustering && cfg.clusters_queries()) {
    ActConfig shared_cfg = cfg;
    shared_cfg.seed = derive_seed(cfg.seed, {3});
    shared = assign_by_hash(query_src, query_hash_params(shared_cfg, query_src.cols()),
                            cfg.literal_eq2);
  }

  MultiHeadResult res;
  std::vector<FeatureMatrix> outs;
  outs.reserve(heads.size());
  for (std::size_t h = 0; h < heads.size(); ++h) {
    ActConfig head_cfg = cfg;
    head_cfg.seed = head_seed(cfg.seed, h);
    ActOutput o = shared ? act_attention(heads[h], head_cfg, *shared)
                         : act_attention(heads[h], head_cfg);
    HeadStats stats{o.num_query_clusters, o.num_key_clusters, heads[h].num_queries(),
                    std::move(o.flops), std::nullopt};
    if (with_map_mse) {
      FeatureMatrix est_map = shared ? estimated_attention_map(heads[h], head_cfg, *shared)
                                     : estimated_attention_map(heads[h], head_cfg);
      stats.map_mse = attention_mse(est_map, exact_attention_map(heads[h]));
    }
    res.heads.push_back(std::move(stats));
    outs.push_back(std::move(o.out));
  }
  res.out = merge_heads(outs, w);
  return res;
}

FeatureMatrix act_multihead(const FeatureMatrix& x, const HeadSpec& spec,
                            const MultiHeadWeights& w, const ActConfig& cfg) {
  return act_multihead(x, x, x, spec, w, cfg).out;
}

}  // namespace act
