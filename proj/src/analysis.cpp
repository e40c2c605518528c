// SPDX-License-Identifier: Apache-2.0
#include "act/analysis.hpp"

#include <cmath>

namespace act {

std::uint64_t FlopsReport::total() const {
  std::uint64_t sum = 0;
  for (const auto& t : terms) sum += t.count;
  return sum;
}

std::uint64_t FlopsReport::term(const std::string& label) const {
  for (const auto& t : terms)
    if (t.label == label) return t.count;
  return 0;
}

namespace {

using u64 = std::uint64_t;

void require_positive(std::initializer_list<std::size_t> dims, const char* what) {
  for (std::size_t d : dims) require(d >= 1, what);
}

// logits, softmax and weighted sum for a rows x cols attention map.
void add_dense_terms(FlopsReport& rep, u64 rows, u64 cols, u64 d_k, u64 d_v) {
  rep.add("logits", 2 * rows * cols * d_k);
  rep.add("softmax", 5 * rows * cols);
  rep.add("weighted-sum", 2 * rows * cols * d_v);
}

}  // namespace

FlopsReport flops_exact(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v) {
  require_positive({n, m, d_k, d_v}, "flops_exact: dimensions must be >= 1");
  FlopsReport rep;
  add_dense_terms(rep, n, m, d_k, d_v);
  return rep;
}

FlopsReport flops_act(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                      std::size_t rounds, std::size_t query_clusters) {
  require_positive({n, m, d_k, d_v, rounds}, "flops_act: dimensions must be >= 1");
  require(query_clusters >= 1 && query_clusters <= n, "flops_act: C_q must be in [1, N]");
  FlopsReport rep;
  rep.add("hashing", u64{2} * n * rounds * d_k);
  rep.add("prototype-averaging", u64{n} * d_k);
  add_dense_terms(rep, query_clusters, m, d_k, d_v);
  rep.add("broadcast", 0);
  return rep;
}

FlopsReport flops_act_keys(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                           std::size_t rounds, std::size_t key_clusters) {
  require_positive({n, m, d_k, d_v, rounds}, "flops_act_keys: dimensions must be >= 1");
  require(key_clusters >= 1 && key_clusters <= m, "flops_act_keys: C_k must be in [1, M]");
  FlopsReport rep;
  rep.add("hashing", u64{2} * m * rounds * d_k);
  rep.add("prototype-averaging", u64{m} * (d_k + d_v));
  rep.add("size-bias", u64{n} * key_clusters);
  add_dense_terms(rep, n, key_clusters, d_k, d_v);
  return rep;
}

FlopsReport flops_act_both(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                           std::size_t query_rounds, std::size_t key_rounds,
                           std::size_t query_clusters, std::size_t key_clusters) {
  require_positive({n, m, d_k, d_v, query_rounds, key_rounds},
                   "flops_act_both: dimensions must be >= 1");
  require(query_clusters >= 1 && query_clusters <= n, "flops_act_both: C_q must be in [1, N]");
  require(key_clusters >= 1 && key_clusters <= m, "flops_act_both: C_k must be in [1, M]");
  FlopsReport rep;
  rep.add("hashing", u64{2} * n * query_rounds * d_k + u64{2} * m * key_rounds * d_k);
  rep.add("prototype-averaging", u64{n} * d_k + u64{m} * (d_k + d_v));
  rep.add("size-bias", u64{query_clusters} * key_clusters);
  add_dense_terms(rep, query_clusters, key_clusters, d_k, d_v);
  rep.add("broadcast", 0);
  return rep;
}

FlopsReport flops_kmeans(std::size_t n, std::size_t m, std::size_t d_k, std::size_t d_v,
                         std::size_t requested_clusters, std::size_t effective_clusters,
                         std::size_t iterations) {
  require_positive({n, m, d_k, d_v, iterations}, "flops_kmeans: dimensions must be >= 1");
  require(requested_clusters >= 1 && requested_clusters <= n,
          "flops_kmeans: requested C must be in [1, N]");
  require(effective_clusters >= 1 && effective_clusters <= requested_clusters,
          "flops_kmeans: effective C must be in [1, requested C]");
  FlopsReport rep;
  rep.add("kmeans-assign", u64{3} * iterations * n * requested_clusters * d_k);
  rep.add("kmeans-update", u64{iterations} * n * d_k);
  rep.add("prototype-averaging", u64{n} * d_k);
  add_dense_terms(rep, effective_clusters, m, d_k, d_v);
  rep.add("broadcast", 0);
  return rep;
}

double attention_mse(const FeatureMatrix& estimated, const FeatureMatrix& exact) {
  require(!estimated.empty() && estimated.rows() == exact.rows() &&
              estimated.cols() == exact.cols(),
          "attention_mse: shape mismatch");
  const auto a = estimated.values();
  const auto b = exact.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

void BoxSet::validate() const {
  for (const auto& box : boxes) {
    for (double v : box) require(std::isfinite(v), "BoxSet: non-finite coordinate");
    require(box[2] >= 0.0 && box[3] >= 0.0, "BoxSet: negative width or height");
  }
}

double kd_loss(const BoxSet& student, const BoxSet& teacher) {
  require(student.boxes.size() == teacher.boxes.size(), "kd_loss: box counts differ");
  student.validate();
  teacher.validate();
  if (student.boxes.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < student.boxes.size(); ++i)
    for (std::size_t c = 0; c < 4; ++c) {
      const double d = student.boxes[i][c] - teacher.boxes[i][c];
      sum += d * d;
    }
  return sum / static_cast<double>(4 * student.boxes.size());
}

std::vector<double> prototype_ratio(
    const std::vector<std::pair<std::size_t, std::size_t>>& per_layer_counts) {
  std::vector<double> out;
  out.reserve(per_layer_counts.size());
  for (const auto& [c, n] : per_layer_counts) {
    require(n >= 1 && c >= 1 && c <= n, "prototype_ratio: need 1 <= C <= N");
    out.push_back(static_cast<double>(c) / static_cast<double>(n));
  }
  return out;
}

}  // namespace act
