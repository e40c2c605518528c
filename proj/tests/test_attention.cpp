// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "act/attention.hpp"
#include "act/study.hpp"
#include "act/synthetic.hpp"
#include "oracles.hpp"

using act::ActConfig;
using act::AttentionInputs;
using act::ClusterMode;
using act::FeatureMatrix;

namespace {

AttentionInputs random_inputs(std::size_t n, std::size_t m, std::size_t dk, std::size_t dv,
                              std::uint64_t seed) {
  return {oracle::random_matrix(n, dk, seed), oracle::random_matrix(m, dk, seed + 1),
          oracle::random_matrix(m, dv, seed + 2)};
}

ActConfig singleton_config(ClusterMode mode, std::uint64_t seed) {
  ActConfig cfg;
  cfg.r = 1e-6;
  cfg.rounds = 32;
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

void check_rows_sum_to_one(const FeatureMatrix& map) {
  for (std::size_t i = 0; i < map.rows(); ++i) {
    double sum = 0.0;
    for (double v : map.row(i)) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
}

}  // namespace

TEST_CASE("tiny bucket width reproduces exact attention") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = random_inputs(64, 64, 32, 32, 1000 + seed * 3);
    const auto res = act::act_attention(in, singleton_config(ClusterMode::Queries, seed));
    CHECK(res.num_query_clusters == 64);
    CHECK(oracle::max_rel_diff(res.out, act::exact_attention(in), 1e-3) < 1e-5);
  }
}

TEST_CASE("keys and both modes are exact with singleton clusters") {
  for (auto mode : {ClusterMode::Keys, ClusterMode::Both}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto in = random_inputs(20, 30, 8, 5, 40 + seed * 3);
      const auto res = act::act_attention(in, singleton_config(mode, seed));
      CHECK(res.num_key_clusters == 30);
      CHECK(oracle::max_abs_diff(res.out, act::exact_attention(in)) < 1e-9);
      CHECK(act::attention_mse(act::estimated_attention_map(in, singleton_config(mode, seed)),
                               act::exact_attention_map(in)) < 1e-20);
    }
  }
}

TEST_CASE("keys mode is exact when every key cluster holds identical keys") {
  // Three distinct keys, each repeated; values vary within a cluster.
  auto k = FeatureMatrix(12, 4);
  const auto distinct = oracle::random_matrix(3, 4, 5, 3.0);
  for (std::size_t j = 0; j < 12; ++j)
    for (std::size_t t = 0; t < 4; ++t) k(j, t) = distinct(j % 3, t);
  const AttentionInputs in{oracle::random_matrix(7, 4, 6), k, oracle::random_matrix(12, 3, 7)};
  ActConfig cfg;
  cfg.mode = ClusterMode::Keys;
  cfg.r = 1e-3;
  const auto res = act::act_attention(in, cfg);
  CHECK(res.num_key_clusters == 3);
  CHECK(oracle::max_abs_diff(res.out, act::exact_attention(in)) < 1e-9);
}

TEST_CASE("identical queries collapse to one prototype") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto in = random_inputs(16, 16, 8, 8, seed * 7);
    for (std::size_t i = 1; i < 16; ++i)
      for (std::size_t t = 0; t < 8; ++t) in.q(i, t) = in.q(0, t);
    ActConfig cfg;
    cfg.seed = seed;
    const auto res = act::act_attention(in, cfg);
    CHECK(res.num_query_clusters == 1);
    CHECK(oracle::max_abs_diff(res.out, act::exact_attention(in)) < 1e-9);
  }
}

TEST_CASE("members of a cluster receive bit-identical rows") {
  const auto x = act::gen_synthetic(act::mixture_suite());
  const auto in = act::self_attention_inputs(x);
  ActConfig cfg;
  cfg.r = 8.0;
  cfg.rounds = 16;
  const auto res = act::act_attention(in, cfg);
  const auto asg = act::assign_by_hash(x, act::query_hash_params(cfg, x.cols()));
  REQUIRE(asg.num_clusters() == res.num_query_clusters);
  REQUIRE(asg.num_clusters() < x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (asg.label(i) == asg.label(j))
        for (std::size_t t = 0; t < x.cols(); ++t) CHECK(res.out(i, t) == res.out(j, t));
}

TEST_CASE("estimate stays in the convex hull of V") {
  for (auto mode : {ClusterMode::Queries, ClusterMode::Keys, ClusterMode::Both}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto in = random_inputs(40, 40, 4, 3, seed * 11);
      ActConfig cfg;
      cfg.r = 2.0;
      cfg.rounds = 4;
      cfg.mode = mode;
      cfg.seed = seed;
      const auto out = act::act_attention(in, cfg).out;
      for (std::size_t c = 0; c < 3; ++c) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t j = 0; j < 40; ++j) {
          lo = std::min(lo, in.v(j, c));
          hi = std::max(hi, in.v(j, c));
        }
        for (std::size_t i = 0; i < 40; ++i) {
          CHECK(out(i, c) >= lo - 1e-9);
          CHECK(out(i, c) <= hi + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("estimated attention map") {
  const auto in = random_inputs(50, 30, 6, 4, 12);
  for (auto mode : {ClusterMode::Queries, ClusterMode::Keys, ClusterMode::Both}) {
    ActConfig cfg;
    cfg.r = 3.0;
    cfg.rounds = 6;
    cfg.mode = mode;
    const auto map = act::estimated_attention_map(in, cfg);
    CHECK(map.rows() == 50);
    CHECK(map.cols() == 30);
    check_rows_sum_to_one(map);
    // the map reproduces the output when applied to V
    CHECK(oracle::max_abs_diff(act::matmul(map, in.v), act::act_attention(in, cfg).out) < 1e-9);
  }
}

TEST_CASE("flops field follows the cluster count") {
  const auto in = random_inputs(64, 64, 16, 16, 3);
  std::size_t prev_c = 0;
  std::uint64_t prev_flops = 0;
  for (double r : {50.0, 10.0, 4.0, 2.0, 1.0, 0.5}) {
    ActConfig cfg;
    cfg.r = r;
    cfg.rounds = 8;
    const auto res = act::act_attention(in, cfg);
    CHECK(res.flops == act::flops_act(64, 64, 16, 16, 8, res.num_query_clusters));
    if (res.num_query_clusters > prev_c) CHECK(res.flops.total() > prev_flops);
    if (res.num_query_clusters == prev_c) CHECK(res.flops.total() == prev_flops);
    prev_c = res.num_query_clusters;
    prev_flops = res.flops.total();
  }
}

TEST_CASE("map error falls with more rounds and rises with wider buckets") {
  const auto suite = act::mixture_suite();
  auto mean_mse = [&](double r, std::size_t rounds) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto spec = suite;
      spec.seed = seed;
      const auto in = act::self_attention_inputs(act::gen_synthetic(spec));
      ActConfig cfg;
      cfg.r = r;
      cfg.rounds = rounds;
      cfg.seed = seed;
      total += act::attention_mse(act::estimated_attention_map(in, cfg),
                                  act::exact_attention_map(in));
    }
    return total / 10.0;
  };
  CHECK(mean_mse(8.0, 32) <= mean_mse(8.0, 16));
  CHECK(mean_mse(12.0, 24) >= mean_mse(2.0, 24));
}

TEST_CASE("kmeans_attention") {
  const auto in = act::self_attention_inputs(act::gen_synthetic(act::mixture_suite()));
  const auto km = act::kmeans_attention(in, 16, 10, 5);
  CHECK(km.requested_clusters == 16);
  CHECK(km.iterations_run == 10);
  CHECK(km.output.num_query_clusters <= 16);
  check_rows_sum_to_one(km.map);
  CHECK(oracle::max_abs_diff(act::matmul(km.map, in.v), km.output.out) < 1e-9);
  CHECK(km.output.flops == act::flops_kmeans(256, 256, 32, 32, 16,
                                             km.output.num_query_clusters, 10));
}

TEST_CASE("multi-head ACT") {
  SUBCASE("one head with identity weights is single-head ACT") {
    const auto x = oracle::random_matrix(30, 8, 4);
    ActConfig cfg;
    cfg.r = 2.0;
    cfg.rounds = 6;
    cfg.seed = 9;
    const auto multi = act::act_multihead(x, act::HeadSpec::split(1, 8),
                                          act::MultiHeadWeights::identity(8), cfg);
    ActConfig head_cfg = cfg;
    head_cfg.seed = act::head_seed(cfg.seed, 0);
    const auto single = act::act_attention(act::self_attention_inputs(x), head_cfg);
    CHECK(oracle::max_abs_diff(multi, single.out) < 1e-12);
  }
  SUBCASE("singleton clusters reproduce exact multi-head attention") {
    const std::size_t d = 16;
    const auto spec = act::HeadSpec::split(4, d);
    const act::MultiHeadWeights w{oracle::random_matrix(d, d, 1, 0.25),
                                  oracle::random_matrix(d, d, 2, 0.25),
                                  oracle::random_matrix(d, d, 3, 0.25),
                                  oracle::random_matrix(d, d, 4, 0.25)};
    const auto x = oracle::random_matrix(40, d, 5);
    const auto res = act::act_multihead(x, spec, w, singleton_config(ClusterMode::Queries, 1));
    CHECK(oracle::max_rel_diff(res, act::exact_multihead(x, spec, w), 1e-3) < 1e-5);
  }
  SUBCASE("heads hash independently") {
    const auto x = act::gen_synthetic(act::mixture_suite());
    const auto spec = act::HeadSpec::split(2, 32);
    ActConfig cfg;
    cfg.r = 1.0;
    cfg.rounds = 8;
    bool differs = false;
    for (std::uint64_t seed = 0; seed < 5 && !differs; ++seed) {
      cfg.seed = seed;
      const auto res = act::act_multihead(x, x, x, spec, act::MultiHeadWeights::identity(32), cfg);
      REQUIRE(res.heads.size() == 2);
      differs = res.heads[0].num_query_clusters != res.heads[1].num_query_clusters;
    }
    CHECK(differs);
  }
  SUBCASE("shared query clustering gives every head the same partition") {
    const auto x = act::gen_synthetic(act::mixture_suite());
    ActConfig cfg;
    cfg.shared_query_clustering = true;
    const auto res = act::act_multihead(x, x, x, act::HeadSpec::split(4, 32),
                                        act::MultiHeadWeights::identity(32), cfg, true);
    for (const auto& h : res.heads) {
      CHECK(h.num_query_clusters == res.heads[0].num_query_clusters);
      REQUIRE(h.map_mse.has_value());
      CHECK(*h.map_mse >= 0.0);
    }
  }
}

TEST_CASE("configuration errors") {
  const auto in = random_inputs(4, 4, 2, 2, 1);
  ActConfig cfg;
  cfg.r = 0.0;
  CHECK_THROWS_AS(act::act_attention(in, cfg), act::ContractError);
  cfg = {};
  cfg.rounds = 0;
  CHECK_THROWS_AS(act::act_attention(in, cfg), act::ContractError);
  cfg = {};
  cfg.mode = static_cast<ClusterMode>(7);
  CHECK_THROWS_AS(act::act_attention(in, cfg), act::ContractError);
  CHECK_THROWS_AS(act::parse_cluster_mode("values"), act::ContractError);
  CHECK(act::parse_cluster_mode("both") == ClusterMode::Both);
  CHECK(act::to_string(ClusterMode::Keys) == "keys");

  const std::vector<std::int64_t> three{0, 1, 2};
  CHECK_THROWS_AS(act::act_attention(in, ActConfig{}, act::ClusterAssignment::from_labels(three)),
                  act::ContractError);
}
