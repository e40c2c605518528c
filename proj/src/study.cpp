// SPDX-License-Identifier: Apache-2.0
#include "act/study.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "act/fmat.hpp"
#include "act/seed.hpp"

namespace act {

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

SyntheticSpec mixture_suite() {
  SyntheticSpec s;
  s.num_blobs = 8;
  s.num_tokens = 256;
  s.dim = 32;
  s.blob_spread = 0.1;
  s.blob_separation = 4.0;
  return s;
}

AttentionInputs self_attention_inputs(const FeatureMatrix& x) { return {x, x, x}; }

// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
  require(!r_values.empty() && !rounds_values.empty() && !modes.empty() && !seeds.empty(),
          "SweepConfig: every grid list must be nonempty");
  for (double r : r_values) require(std::isfinite(r) && r > 0.0, "SweepConfig: r must be positive");
  for (std::size_t l : rounds_values) require(l >= 1, "SweepConfig: rounds must be >= 1");
  if (const auto* spec = std::get_if<SyntheticSpec>(&data)) spec->validate();
}

FeatureMatrix sweep_features(const SweepConfig& cfg, std::uint64_t seed) {
  if (const auto* path = std::get_if<std::filesystem::path>(&cfg.data)) return read_fmat(*path);
  SyntheticSpec spec = std::get<SyntheticSpec>(cfg.data);
  spec.seed = derive_seed(spec.seed, {seed});
  return gen_synthetic(spec);
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();

  struct SeedData {
    AttentionInputs in;
    FeatureMatrix exact_map;
  };
  std::vector<SeedData> per_seed;
  per_seed.reserve(cfg.seeds.size());
  for (std::uint64_t s : cfg.seeds) {
    auto in = self_attention_inputs(sweep_features(cfg, s));
    auto map = exact_attention_map(in);
    per_seed.push_back({std::move(in), std::move(map)});
  }

  std::vector<SweepRow> rows;
  rows.reserve(cfg.r_values.size() * cfg.rounds_values.size() * cfg.modes.size() *
               cfg.seeds.size());
  for (double r : cfg.r_values)
    for (std::size_t rounds : cfg.rounds_values)
      for (ClusterMode mode : cfg.modes)
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
          const auto& sd = per_seed[si];
          ActConfig act;
          act.r = r;
          act.rounds = rounds;
          act.mode = mode;
          act.base = cfg.base;
          act.literal_eq2 = cfg.literal_eq2;
          act.seed = cfg.seeds[si];

          const ActOutput out = act_attention(sd.in, act);
          const FeatureMatrix map = estimated_attention_map(sd.in, act);
          SweepRow row;
          row.r = r;
          row.rounds = rounds;
          row.mode = mode;
          row.seed = cfg.seeds[si];
          row.query_clusters = out.num_query_clusters;
          row.key_clusters = out.num_key_clusters;
          row.mse = attention_mse(map, sd.exact_map);
          row.flops_act_total = out.flops.total();
          row.flops_exact_total = flops_exact(sd.in.num_queries(), sd.in.num_keys(),
                                              sd.in.key_dim(), sd.in.value_dim())
                                      .total();
          rows.push_back(row);
        }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "r,L,mode,seed,C_q,C_k,mse,flops_act_total,flops_exact_total\n";
  for (const auto& row : rows) {
    os << format_real(row.r) << ',' << row.rounds << ',' << to_string(row.mode) << ','
       << row.seed << ',' << row.query_clusters << ',' << row.key_clusters << ','
       << format_real(row.mse) << ',' << row.flops_act_total << ',' << row.flops_exact_total
       << '\n';
  }
  return os.str();
}

std::uint64_t recompute_flops(const SweepRow& row, std::size_t n, std::size_t m,
                              std::size_t d_k, std::size_t d_v) {
  switch (row.mode) {
    case ClusterMode::Queries:
      return flops_act(n, m, d_k, d_v, row.rounds, row.query_clusters).total();
    case ClusterMode::Keys:
      return flops_act_keys(n, m, d_k, d_v, row.rounds, row.key_clusters).total();
    case ClusterMode::Both:
      return flops_act_both(n, m, d_k, d_v, row.rounds, row.rounds, row.query_clusters,
                            row.key_clusters)
          .total();
  }
  throw ContractError("recompute_flops: invalid mode");
}

// ---------------------------------------------------------------------------

void EncoderStudyConfig::validate() const {
  require(num_layers >= 1, "EncoderStudyConfig: need at least one layer");
  require(!seeds.empty(), "EncoderStudyConfig: need at least one seed");
  require(grid_height >= 1 && grid_width >= 1, "EncoderStudyConfig: empty grid");
  heads.validate();
  if (const auto* a = std::get_if<ActConfig>(&attention)) a->validate();
}

EncoderStudy run_encoder_study(const EncoderStudyConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.grid_height * cfg.grid_width;
  const FeatureMatrix pos = sinusoidal_pos_encoding(cfg.grid_height, cfg.grid_width,
                                                    cfg.heads.d_model);
  EncoderOptions opts;
  opts.heads = cfg.heads;
  opts.add_pos = cfg.add_pos;
  opts.mixing = cfg.data.mixing;
  opts.record_mse = cfg.record_mse;

  EncoderStudy study;
  study.rows.resize(cfg.num_layers);
  std::vector<double> mse_sum(cfg.num_layers, 0.0);
  bool have_mse = cfg.record_mse;
  for (std::uint64_t s : cfg.seeds) {
    const auto layers = init_layers(derive_seed(s, {0}), cfg.num_layers, cfg.heads, cfg.d_ffn);
    SyntheticSpec data = cfg.data;
    data.num_tokens = n;
    data.dim = cfg.heads.d_model;
    data.seed = derive_seed(s, {1});
    const FeatureMatrix x = gen_synthetic(data);

    AttentionChoice attn = cfg.attention;
    if (auto* a = std::get_if<ActConfig>(&attn)) a->seed = derive_seed(a->seed, {s});
    const EncoderResult res = encoder_forward(x, pos, layers, attn, opts);

    std::vector<double> ratios;
    for (std::size_t l = 0; l < res.layers.size(); ++l) {
      const auto& ls = res.layers[l];
      const double ratio = ls.mean_prototype_ratio();
      ratios.push_back(ratio);
      auto& row = study.rows[l];
      row.mean_ratio += ratio;
      double cq = 0.0, fl = 0.0, mse = 0.0;
      for (const auto& h : ls.heads) {
        cq += static_cast<double>(h.num_query_clusters);
        fl += static_cast<double>(h.flops.total());
        if (h.map_mse) mse += *h.map_mse;
        else have_mse = false;
      }
      const double heads = static_cast<double>(ls.heads.size());
      row.mean_query_clusters += cq / heads;
      row.mean_flops += fl / heads;
      mse_sum[l] += mse / heads;
    }
    study.ratio.push_back(std::move(ratios));
  }

  const double seeds = static_cast<double>(cfg.seeds.size());
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    auto& row = study.rows[l];
    row.layer = l;
    row.mean_ratio /= seeds;
    row.mean_query_clusters /= seeds;
    row.mean_flops /= seeds;
    row.num_seeds = cfg.seeds.size();
    if (have_mse) row.mean_mse = mse_sum[l] / seeds;
  }
  return study;
}

EncoderStudyConfig homogenizing_encoder_study(std::vector<std::uint64_t> seeds) {
  EncoderStudyConfig cfg;
  cfg.num_layers = 6;
  cfg.heads = HeadSpec::split(8, 64);
  cfg.d_ffn = 128;
  cfg.grid_height = 16;
  cfg.grid_width = 16;
  cfg.data.num_blobs = 8;
  cfg.data.blob_spread = 0.1;
  cfg.data.blob_separation = 8.0;
  cfg.data.mixing = 0.4;
  ActConfig act;
  act.r = 8.0;
  act.rounds = 24;
  cfg.attention = act;
  cfg.seeds = std::move(seeds);
  cfg.add_pos = false;
  return cfg;
}

std::string encoder_study_csv(const EncoderStudy& study) {
  std::ostringstream os;
  os << "layer,mean_ratio,mean_C_q,mean_flops_per_head,mean_mse,seeds\n";
  for (const auto& row : study.rows) {
    os << row.layer << ',' << format_real(row.mean_ratio) << ','
       << format_real(row.mean_query_clusters) << ',' << format_real(row.mean_flops) << ','
       << (row.mean_mse ? format_real(*row.mean_mse) : std::string()) << ',' << row.num_seeds
       << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<KMeansComparisonRow> compare_kmeans(const SyntheticSpec& data, const ActConfig& act,
                                                const std::vector<std::uint64_t>& seeds,
                                                std::size_t kmeans_iters) {
  require(!seeds.empty(), "compare_kmeans: need at least one seed");
  require(act.mode == ClusterMode::Queries, "compare_kmeans: ACT must cluster queries");

  std::vector<KMeansComparisonRow> rows;
  for (std::uint64_t s : seeds) {
    SyntheticSpec spec = data;
    spec.seed = derive_seed(data.seed, {s});
    const auto in = self_attention_inputs(gen_synthetic(spec));
    const FeatureMatrix exact = exact_attention_map(in);

    ActConfig cfg = act;
    cfg.seed = s;
    const ActOutput a = act_attention(in, cfg);

    KMeansComparisonRow row;
    row.seed = s;
    row.act_query_clusters = a.num_query_clusters;
    row.act_flops = a.flops.total();
    row.act_mse = attention_mse(estimated_attention_map(in, cfg), exact);

    // Measured K-means cost grows with C, so scan upward until it is clearly
    // past the ACT budget and keep the closest.
    const double target = static_cast<double>(row.act_flops);
    double best_gap = INFINITY;
    for (std::size_t c = 1; c <= in.num_queries(); ++c) {
      const KMeansAttention km = kmeans_attention(in, c, kmeans_iters, derive_seed(s, {c}));
      const double flops = static_cast<double>(km.output.flops.total());
      const double gap = std::abs(flops / target - 1.0);
      if (gap < best_gap) {
        best_gap = gap;
        row.kmeans_requested = c;
        row.kmeans_effective = km.output.num_query_clusters;
        row.kmeans_iterations = km.iterations_run;
        row.kmeans_flops = km.output.flops.total();
        row.kmeans_mse = attention_mse(km.map, exact);
      }
      if (flops > 1.5 * target) break;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string kmeans_comparison_csv(const std::vector<KMeansComparisonRow>& rows) {
  std::ostringstream os;
  os << "seed,act_C_q,act_flops,act_mse,kmeans_C,kmeans_C_effective,kmeans_iters,kmeans_flops,"
        "kmeans_mse,flops_ratio\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << r.act_query_clusters << ',' << r.act_flops << ','
       << format_real(r.act_mse) << ',' << r.kmeans_requested << ',' << r.kmeans_effective << ','
       << r.kmeans_iterations << ',' << r.kmeans_flops << ',' << format_real(r.kmeans_mse) << ','
       << format_real(r.flops_ratio()) << '\n';
  }
  return os.str();
}

}  // namespace act
