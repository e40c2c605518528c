// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "act/attention.hpp"
#include "act/fmat.hpp"
#include "act/study.hpp"
#include "act/synthetic.hpp"
#include "oracles.hpp"

namespace {

using act::ActConfig;
using act::AttentionInputs;
using act::FeatureMatrix;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Verdict exactness_limit() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AttentionInputs in{oracle::random_matrix(64, 32, 3 * seed),
                             oracle::random_matrix(64, 32, 3 * seed + 1),
                             oracle::random_matrix(64, 32, 3 * seed + 2)};
    ActConfig cfg;
    cfg.r = 1e-6;
    cfg.rounds = 32;
    cfg.seed = seed;
    const auto res = act::act_attention(in, cfg);
    worst = std::max(worst, oracle::max_rel_diff(res.out, act::exact_attention(in), 1e-3));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-5 && secs < 10.0,
          fmt("max rel err %.3g over 100 instances, %.2f s", worst, secs)};
}

Verdict degenerate_collapse() {
  std::size_t worst_c = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AttentionInputs in{oracle::random_matrix(32, 16, seed), oracle::random_matrix(48, 16, seed + 50),
                       oracle::random_matrix(48, 8, seed + 99)};
    for (std::size_t i = 1; i < in.q.rows(); ++i)
      for (std::size_t t = 0; t < in.q.cols(); ++t) in.q(i, t) = in.q(0, t);
    ActConfig cfg;
    cfg.seed = seed;
    const auto res = act::act_attention(in, cfg);
    worst_c = std::max(worst_c, res.num_query_clusters);
    worst = std::max(worst, oracle::max_abs_diff(res.out, act::exact_attention(in)));
  }
  return {worst_c == 1 && worst <= 1e-9,
          fmt("max C_q %.0f, max abs err %.3g over 20 seeds", static_cast<double>(worst_c), worst)};
}

Verdict scalar_oracles() {
  double att = 0.0, mse = 0.0, kd = 0.0, proto = 0.0;
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AttentionInputs in{oracle::random_matrix(16, 16, seed), oracle::random_matrix(16, 16, seed + 1),
                             oracle::random_matrix(16, 16, seed + 2)};
    att = std::max(att, oracle::max_abs_diff(act::exact_attention(in),
                                             oracle::attention(oracle::to_grid(in.q),
                                                               oracle::to_grid(in.k),
                                                               oracle::to_grid(in.v))));
    mse = std::max(mse, std::abs(act::attention_mse(in.q, in.k) -
                                 oracle::mse(oracle::to_grid(in.q), oracle::to_grid(in.k))));

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    act::BoxSet a, b;
    double ref = 0.0;
    for (int i = 0; i < 10; ++i) {
      a.boxes.push_back({unit(rng), unit(rng), unit(rng), unit(rng)});
      b.boxes.push_back({unit(rng), unit(rng), unit(rng), unit(rng)});
      for (int c = 0; c < 4; ++c) ref += std::pow(a.boxes.back()[c] - b.boxes.back()[c], 2);
    }
    kd = std::max(kd, std::abs(act::kd_loss(a, b) - ref / 40.0));

    std::vector<std::int64_t> raw(16);
    std::uniform_int_distribution<int> pick(0, 4);
    for (auto& r : raw) r = pick(rng);
    const auto asg = act::ClusterAssignment::from_labels(raw);
    const auto p = act::compute_prototypes(in.v, asg);
    proto = std::max(proto, oracle::max_abs_diff(
                                p.p, oracle::prototypes(oracle::to_grid(in.v),
                                                        {asg.labels().begin(), asg.labels().end()},
                                                        asg.num_clusters())));
  }
  return {att <= 1e-6 && mse <= 1e-12 && kd <= 1e-12 && proto <= 1e-12,
          "attention " + fmt("%.2g", att) + ", mse " + fmt("%.2g", mse) + ", kd " +
              fmt("%.2g", kd) + ", prototypes " + fmt("%.2g", proto)};
}

// Mean MSE per grid value; adjacent pairs may move the wrong way by at most 5%.
Verdict mse_trends() {
  const auto start = std::chrono::steady_clock::now();
  act::SweepConfig cfg;
  cfg.data = act::mixture_suite();
  cfg.modes = {act::ClusterMode::Queries};
  cfg.seeds = seed_range(20);

  auto means = [&](const std::vector<act::SweepRow>& rows, auto key, const auto& values) {
    std::vector<double> m;
    for (auto v : values) {
      double s = 0.0;
      std::size_t n = 0;
      for (const auto& r : rows)
        if (key(r) == v) {
          s += r.mse;
          ++n;
        }
      m.push_back(s / static_cast<double>(n));
    }
    return m;
  };

  cfg.r_values = {8.0};
  cfg.rounds_values = {16, 20, 24, 32};
  const auto by_l = means(act::run_sweep(cfg), [](const act::SweepRow& r) { return r.rounds; },
                          cfg.rounds_values);
  const std::vector<double> rs{2, 4, 6, 8, 12};
  cfg.r_values = rs;
  cfg.rounds_values = {24};
  const auto by_r = means(act::run_sweep(cfg), [](const act::SweepRow& r) { return r.r; }, rs);

  bool ok = true;
  std::string detail = "L:";
  for (std::size_t i = 0; i < by_l.size(); ++i) {
    detail += fmt(" %.3g", by_l[i]);
    if (i > 0 && by_l[i] > by_l[i - 1] * 1.05) ok = false;
  }
  detail += "; r:";
  for (std::size_t i = 0; i < by_r.size(); ++i) {
    detail += fmt(" %.3g", by_r[i]);
    if (i > 0 && by_r[i] < by_r[i - 1] * 0.95) ok = false;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail += fmt("; %.1f s", secs);
  return {ok && secs < 120.0, detail};
}

Verdict cost_model() {
  std::size_t points = 0, mismatches = 0;
  for (std::uint64_t n : {16, 64, 256, 1000})
    for (std::uint64_t m : {16, 100, 1000})
      for (std::uint64_t dk : {8, 32, 64})
        for (std::uint64_t dv : {8, 64})
          for (std::uint64_t l : {1, 8, 24, 64})
            for (std::uint64_t c : {std::uint64_t{1}, n / 8, n / 2, n - 1, n}) {
              const std::uint64_t k = 2 * m * dk + 5 * m + 2 * m * dv;
              const std::uint64_t overhead = 2 * l * dk + dk;
              const bool predicted = overhead < k && c * k < n * (k - overhead);
              const bool actual = act::flops_act(n, m, dk, dv, l, c).total() <
                                  act::flops_exact(n, m, dk, dv).total();
              ++points;
              if (predicted != actual) ++mismatches;
            }

  act::SweepConfig cfg;
  cfg.data = act::mixture_suite();
  cfg.r_values = {2, 8, 12};
  cfg.rounds_values = {16, 32};
  cfg.modes = {act::ClusterMode::Queries, act::ClusterMode::Keys, act::ClusterMode::Both};
  cfg.seeds = seed_range(3);
  std::size_t rows = 0, bad_rows = 0;
  for (const auto& row : act::run_sweep(cfg)) {
    ++rows;
    if (act::recompute_flops(row, 256, 256, 32, 32) != row.flops_act_total) ++bad_rows;
  }
  return {points >= 1000 && mismatches == 0 && bad_rows == 0,
          fmt("%.0f grid points, %.0f mismatches; ", static_cast<double>(points),
              static_cast<double>(mismatches)) +
              fmt("%.0f sweep rows, %.0f not recomputable", static_cast<double>(rows),
                  static_cast<double>(bad_rows))};
}

Verdict kmeans_comparison() {
  const auto rows = act::compare_kmeans(act::mixture_suite(), ActConfig{}, seed_range(20));
  double act_mse = 0.0, km_mse = 0.0, worst_ratio = 0.0;
  for (const auto& r : rows) {
    act_mse += r.act_mse;
    km_mse += r.kmeans_mse;
    worst_ratio = std::max(worst_ratio, std::abs(r.flops_ratio() - 1.0));
  }
  act_mse /= static_cast<double>(rows.size());
  km_mse /= static_cast<double>(rows.size());
  const bool matched = worst_ratio <= 0.05;
  const bool not_much_worse = act_mse <= 1.25 * km_mse;
  std::string detail = fmt("ACT mse %.3g vs K-means %.3g, worst FLOPs mismatch %.1f%%", act_mse,
                           km_mse, 100.0 * worst_ratio);
  detail += act_mse <= km_mse ? " (ACT better or equal)" : " (ACT worse, within 25%)";
  return {matched && not_much_worse, detail};
}

Verdict prototype_ratio_trend() {
  const auto study = act::run_encoder_study(act::homogenizing_encoder_study(seed_range(20)));
  std::size_t monotone = 0;
  for (const auto& per_layer : study.ratio) {
    bool ok = true;
    for (std::size_t l = 1; l < per_layer.size(); ++l) ok = ok && per_layer[l] <= per_layer[l - 1];
    if (ok) ++monotone;
  }
  const double first = study.rows.front().mean_ratio, last = study.rows.back().mean_ratio;

  // Same study with positional encoding on, for information only.
  auto with_pos = act::homogenizing_encoder_study(seed_range(20));
  with_pos.add_pos = true;
  const auto pos_study = act::run_encoder_study(with_pos);

  return {last < first,
          fmt("layer ratio %.4g -> %.4g, %.0f/20 seeds monotone", first, last,
              static_cast<double>(monotone)) +
              fmt("; with positional encoding %.4g -> %.4g", pos_study.rows.front().mean_ratio,
                  pos_study.rows.back().mean_ratio)};
}

Verdict determinism_and_io() {
  act::SweepConfig cfg;
  cfg.data = act::mixture_suite();
  cfg.r_values = {4, 8};
  cfg.rounds_values = {16, 24};
  cfg.modes = {act::ClusterMode::Queries, act::ClusterMode::Both};
  cfg.seeds = seed_range(3);
  const bool sweep_same = act::sweep_csv(act::run_sweep(cfg)) == act::sweep_csv(act::run_sweep(cfg));

  auto study_cfg = act::homogenizing_encoder_study({0, 1});
  study_cfg.num_layers = 2;
  const bool study_same = act::encoder_study_csv(act::run_encoder_study(study_cfg)) ==
                          act::encoder_study_csv(act::run_encoder_study(study_cfg));

  auto m = oracle::random_matrix(17, 9, 3, 5.0);
  for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
  const auto path = std::filesystem::temp_directory_path() / "act_acceptance.fmat";
  act::write_fmat(path, m);
  const bool round_trip = act::read_fmat(path) == m;
  std::filesystem::remove(path);

  auto kind = [](std::vector<std::uint8_t> bytes) {
    try {
      act::decode_fmat(bytes);
    } catch (const act::FmatError& e) {
      return std::string(act::to_string(e.kind()));
    }
    return std::string("accepted");
  };
  auto bytes = act::encode_fmat(m);
  auto bad_magic = bytes;
  bad_magic[1] = '?';
  const auto magic_kind = kind(bad_magic);
  const auto trunc_kind = kind({bytes.begin(), bytes.end() - 3});
  const bool errors = magic_kind == act::to_string(act::FmatErrorKind::BadMagic) &&
                      trunc_kind == act::to_string(act::FmatErrorKind::Truncated);

  return {sweep_same && study_same && round_trip && errors,
          std::string("sweep csv ") + (sweep_same ? "identical" : "DIFFERS") + ", study csv " +
              (study_same ? "identical" : "DIFFERS") + ", round trip " +
              (round_trip ? "exact" : "LOSSY") + ", errors: " + magic_kind + " / " + trunc_kind};
}

Verdict invariants() {
  std::size_t maps = 0, bad_rows = 0, partitions = 0, bad_partitions = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto spec = act::mixture_suite();
    spec.seed = seed;
    const auto x = act::gen_synthetic(spec);
    const auto in = act::self_attention_inputs(x);
    for (auto mode : {act::ClusterMode::Queries, act::ClusterMode::Keys, act::ClusterMode::Both})
      for (double r : {0.5, 4.0, 32.0}) {
        ActConfig cfg;
        cfg.r = r;
        cfg.rounds = 16;
        cfg.mode = mode;
        cfg.seed = seed;
        const auto map = act::estimated_attention_map(in, cfg);
        ++maps;
        for (std::size_t i = 0; i < map.rows(); ++i) {
          double s = 0.0;
          for (double v : map.row(i)) s += v;
          if (std::abs(s - 1.0) > 1e-6) ++bad_rows;
        }
        for (bool literal : {false, true}) {
          const auto asg = act::assign_by_hash(
              x, act::sample_params(seed, 16, x.cols(), r), literal);
          ++partitions;
          std::size_t total = 0;
          bool nonempty = true;
          for (std::size_t s : asg.sizes()) {
            total += s;
            nonempty = nonempty && s >= 1;
          }
          if (total != x.rows() || !nonempty) ++bad_partitions;
        }
      }
  }
  return {bad_rows == 0 && bad_partitions == 0,
          fmt("%.0f maps, %.0f rows off; ", static_cast<double>(maps),
              static_cast<double>(bad_rows)) +
              fmt("%.0f partitions, %.0f invalid", static_cast<double>(partitions),
                  static_cast<double>(bad_partitions))};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"1 exactness limit (r=1e-6, L=32)", exactness_limit},
      {"2 identical queries collapse", degenerate_collapse},
      {"3 scalar oracle equivalence", scalar_oracles},
      {"4 MSE trends in L and r", mse_trends},
      {"5 cost model consistency", cost_model},
      {"6 ACT vs K-means at matched FLOPs", kmeans_comparison},
      {"7 prototype ratio falls with depth", prototype_ratio_trend},
      {"8 determinism and FMAT IO", determinism_and_io},
      {"9 softmax and partition invariants", invariants},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s  criterion %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
