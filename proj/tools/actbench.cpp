// SPDX-License-Identifier: Apache-2.0
//
// actbench: command-line front end for the clustered-attention library.
//
//   actbench gen     --out x.fmat [mixture options]
//   actbench attn    --q q.fmat [--k k.fmat --v v.fmat] --method exact|act|kmeans
//   actbench sweep   --r 2,4,8 --L 16,24 --mode queries [--kmeans-out cmp.csv]
//   actbench encoder [--preset homogenizing] [--exact] [--no-pos]
//   actbench flops   --n 1000 --m 1000 --dk 64 --dv 64 --L 24 --C 100
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "act/attention.hpp"
#include "act/fmat.hpp"
#include "act/study.hpp"
#include "act/synthetic.hpp"

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

std::vector<std::uint64_t> seed_list(std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = i;
  return s;
}

std::string flops_csv(const act::FlopsReport& rep) {
  std::string s = "label,count\n";
  for (const auto& t : rep.terms) s += t.label + "," + std::to_string(t.count) + "\n";
  return s + "total," + std::to_string(rep.total()) + "\n";
}

void add_mixture_options(CLI::App* cmd, act::SyntheticSpec& spec) {
  cmd->add_option("--blobs", spec.num_blobs, "mixture components")->check(CLI::PositiveNumber);
  cmd->add_option("--spread", spec.blob_spread, "within-blob standard deviation")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--separation", spec.blob_separation, "norm of blob centers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered attention benchmarks"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "master seed")->capture_default_str();

  // gen ---------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "write Gaussian-mixture features as FMAT");
  act::SyntheticSpec gen_spec;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output file")->required();
  gen->add_option("--tokens", gen_spec.num_tokens, "rows")->check(CLI::PositiveNumber);
  gen->add_option("--dim", gen_spec.dim, "columns")->check(CLI::PositiveNumber);
  add_mixture_options(gen, gen_spec);

  // attn --------------------------------------------------------------------
  auto* attn = app.add_subcommand("attn", "run one attention estimate on FMAT inputs");
  std::string q_path, k_path, v_path, attn_out, method = "act", mode = "queries";
  act::ActConfig attn_cfg;
  std::size_t clusters = 16, iters = 10;
  attn->add_option("--q", q_path, "queries (N x Dk)")->required();
  attn->add_option("--k", k_path, "keys (M x Dk); defaults to the queries");
  attn->add_option("--v", v_path, "values (M x Dv); defaults to the keys");
  attn->add_option("--method", method, "exact, act or kmeans")
      ->check(CLI::IsMember({"exact", "act", "kmeans"}));
  attn->add_option("--mode", mode, "queries, keys or both");
  attn->add_option("--r", attn_cfg.r, "bucket width");
  attn->add_option("--L", attn_cfg.rounds, "hash rounds");
  attn->add_flag("--literal-key", attn_cfg.literal_eq2, "group by the combined integer key");
  attn->add_option("--C", clusters, "K-means cluster count");
  attn->add_option("--iters", iters, "K-means iterations");
  attn->add_option("--out", attn_out, "write the output matrix as FMAT");

  // sweep -------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "(r, L) grid over the mixture suite or a file");
  std::vector<double> r_values{2, 4, 6, 8, 12};
  std::vector<std::size_t> l_values{16, 20, 24, 32};
  std::vector<std::string> modes{"queries"};
  std::size_t sweep_seeds = 20;
  std::string data_path, sweep_out, kmeans_out;
  act::SyntheticSpec sweep_spec = act::mixture_suite();
  std::uint32_t base = 4;
  bool literal = false;
  sweep->add_option("--r", r_values, "bucket widths")->delimiter(',');
  sweep->add_option("--L", l_values, "hash round counts")->delimiter(',');
  sweep->add_option("--mode", modes, "cluster modes")->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--data", data_path, "FMAT features (self-attention) instead of the mixture");
  sweep->add_option("--tokens", sweep_spec.num_tokens, "mixture rows")->check(CLI::PositiveNumber);
  sweep->add_option("--dim", sweep_spec.dim, "mixture columns")->check(CLI::PositiveNumber);
  add_mixture_options(sweep, sweep_spec);
  sweep->add_option("--base", base, "base of the combined integer key");
  sweep->add_flag("--literal-key", literal, "group by the combined integer key");
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep->add_option("--kmeans-out", kmeans_out,
                    "also compare against K-means at matched FLOPs (first r and L)");

  // encoder -----------------------------------------------------------------
  auto* enc = app.add_subcommand("encoder", "per-layer prototype ratio of the toy encoder");
  act::EncoderStudyConfig enc_cfg;
  std::string preset, enc_out;
  std::size_t heads = 8, d_model = 64, grid = 32, enc_seeds = 20;
  act::ActConfig enc_act;
  bool exact = false, no_pos = false;
  enc->add_option("--preset", preset, "homogenizing")->check(CLI::IsMember({"homogenizing"}));
  enc->add_option("--layers", enc_cfg.num_layers, "encoder layers")->check(CLI::PositiveNumber);
  enc->add_option("--heads", heads, "attention heads")->check(CLI::PositiveNumber);
  enc->add_option("--d-model", d_model, "model width")->check(CLI::PositiveNumber);
  enc->add_option("--d-ffn", enc_cfg.d_ffn, "feed-forward width")->check(CLI::PositiveNumber);
  enc->add_option("--grid", grid, "feature map side (N = grid^2)")->check(CLI::PositiveNumber);
  enc->add_option("--mixing", enc_cfg.data.mixing, "per-layer pull toward the token mean")
      ->check(CLI::Range(0.0, 1.0));
  add_mixture_options(enc, enc_cfg.data);
  enc->add_option("--r", enc_act.r, "bucket width");
  enc->add_option("--L", enc_act.rounds, "hash rounds");
  enc->add_option("--seeds", enc_seeds, "number of seeds")->check(CLI::PositiveNumber);
  enc->add_flag("--exact", exact, "dense attention instead of ACT");
  enc->add_flag("--no-pos", no_pos, "do not add positional encodings");
  enc->add_flag("--mse", enc_cfg.record_mse, "record attention-map MSE per head");
  enc->add_option("--out", enc_out, "CSV path (default stdout)");

  // flops -------------------------------------------------------------------
  auto* fl = app.add_subcommand("flops", "closed-form FLOP counts");
  std::size_t n = 1000, m = 1000, dk = 64, dv = 64, rounds = 24, c = 100;
  std::string fl_method = "act";
  fl->add_option("--n", n, "queries");
  fl->add_option("--m", m, "keys");
  fl->add_option("--dk", dk, "key width");
  fl->add_option("--dv", dv, "value width");
  fl->add_option("--L", rounds, "hash rounds");
  fl->add_option("--C", c, "cluster count");
  fl->add_option("--method", fl_method, "exact, act or keys")
      ->check(CLI::IsMember({"exact", "act", "keys"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_spec.seed = seed;
      act::write_fmat(gen_out, act::gen_synthetic(gen_spec));
    } else if (attn->parsed()) {
      const auto q = act::read_fmat(q_path);
      const auto k = k_path.empty() ? q : act::read_fmat(k_path);
      const auto v = v_path.empty() ? k : act::read_fmat(v_path);
      const act::AttentionInputs in{q, k, v};
      in.validate();
      attn_cfg.mode = act::parse_cluster_mode(mode);
      attn_cfg.seed = seed;

      act::FeatureMatrix out, map;
      std::size_t cq = in.num_queries(), ck = in.num_keys();
      act::FlopsReport rep;
      if (method == "exact") {
        out = act::exact_attention(in);
        map = act::exact_attention_map(in);
        rep = act::flops_exact(in.num_queries(), in.num_keys(), in.key_dim(), in.value_dim());
      } else if (method == "act") {
        auto res = act::act_attention(in, attn_cfg);
        out = std::move(res.out);
        map = act::estimated_attention_map(in, attn_cfg);
        if (res.num_query_clusters) cq = res.num_query_clusters;
        if (res.num_key_clusters) ck = res.num_key_clusters;
        rep = std::move(res.flops);
      } else {
        auto res = act::kmeans_attention(in, clusters, iters, seed);
        out = std::move(res.output.out);
        map = std::move(res.map);
        cq = res.output.num_query_clusters;
        rep = std::move(res.output.flops);
      }
      const double mse = act::attention_mse(map, act::exact_attention_map(in));
      const auto exact_total =
          act::flops_exact(in.num_queries(), in.num_keys(), in.key_dim(), in.value_dim()).total();
      std::cout << "method,C_q,C_k,mse,flops,flops_exact\n"
                << method << ',' << cq << ',' << ck << ',' << act::format_real(mse) << ','
                << rep.total() << ',' << exact_total << '\n';
      if (!attn_out.empty()) act::write_fmat(attn_out, out);
    } else if (sweep->parsed()) {
      act::SweepConfig cfg;
      cfg.r_values = r_values;
      cfg.rounds_values = l_values;
      for (const auto& name : modes) cfg.modes.push_back(act::parse_cluster_mode(name));
      cfg.seeds = seed_list(sweep_seeds);
      cfg.base = base;
      cfg.literal_eq2 = literal;
      sweep_spec.seed = seed;
      if (data_path.empty()) cfg.data = sweep_spec;
      else cfg.data = std::filesystem::path(data_path);
      emit(act::sweep_csv(act::run_sweep(cfg)), sweep_out);

      if (!kmeans_out.empty()) {
        if (!data_path.empty())
          throw act::ContractError("--kmeans-out needs the synthetic mixture, not --data");
        act::ActConfig a;
        a.r = r_values.front();
        a.rounds = l_values.front();
        a.base = base;
        a.literal_eq2 = literal;
        emit(act::kmeans_comparison_csv(act::compare_kmeans(sweep_spec, a, cfg.seeds)),
             kmeans_out);
      }
    } else if (enc->parsed()) {
      act::EncoderStudyConfig cfg = enc_cfg;
      if (preset == "homogenizing") {
        cfg = act::homogenizing_encoder_study({});
        if (enc->count("--layers")) cfg.num_layers = enc_cfg.num_layers;
        if (enc->count("--mse")) cfg.record_mse = enc_cfg.record_mse;
      } else {
        cfg.heads = act::HeadSpec::split(heads, d_model);
        cfg.grid_height = cfg.grid_width = grid;
        cfg.add_pos = !no_pos;
        cfg.attention = enc_act;
      }
      cfg.seeds = seed_list(enc_seeds);
      if (exact) cfg.attention = act::ExactAttention{};
      if (auto* a = std::get_if<act::ActConfig>(&cfg.attention)) {
        a->seed = seed;
        if (enc->count("--r")) a->r = enc_act.r;
        if (enc->count("--L")) a->rounds = enc_act.rounds;
      }
      if (no_pos) cfg.add_pos = false;
      cfg.data.seed = seed;
      emit(act::encoder_study_csv(act::run_encoder_study(cfg)), enc_out);
    } else if (fl->parsed()) {
      act::FlopsReport rep;
      if (fl_method == "exact") rep = act::flops_exact(n, m, dk, dv);
      else if (fl_method == "act") rep = act::flops_act(n, m, dk, dv, rounds, c);
      else rep = act::flops_act_keys(n, m, dk, dv, rounds, c);
      std::cout << flops_csv(rep);
    }
  } catch (const std::exception& e) {
    std::cerr << "actbench: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
