#include "fixtures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "embedgeom/random.hpp"

namespace embedgeom::testing {

namespace {

std::string make_id(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return prefix + buf;
}

std::vector<std::string> make_ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(make_id(prefix, i));
  return ids;
}

double cosine(const float* a, const float* b, std::size_t d) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

EmbeddingMatrix gaussian_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                MatrixKind kind, const std::string& prefix) {
  Rng rng(seed);
  std::vector<float> data(rows * dim);
  for (auto& v : data) v = static_cast<float>(rng.normal());
  return EmbeddingMatrix(make_ids(prefix, rows), std::move(data), dim, kind);
}

SearchFixture gaussian_mixture_search(std::size_t items, std::size_t queries, std::size_t dim,
                                      std::uint64_t seed) {
  constexpr std::size_t clusters = 10;
  Rng rng(seed);
  std::vector<double> centers(clusters * dim);
  for (auto& c : centers) c = 1.5 * rng.normal();
  std::vector<float> item_data(items * dim);
  for (std::size_t i = 0; i < items; ++i) {
    const std::size_t c = rng.below(clusters);
    for (std::size_t j = 0; j < dim; ++j) {
      item_data[i * dim + j] = static_cast<float>(centers[c * dim + j] + rng.normal());
    }
  }
  std::vector<std::uint64_t> relevant = sample_without_replacement(rng, items, queries);
  std::vector<float> query_data(queries * dim);
  RelevanceSet relevance;
  const auto item_ids = make_ids("item", items);
  const auto query_ids = make_ids("q", queries);
  for (std::size_t q = 0; q < queries; ++q) {
    const std::size_t r = relevant[q];
    for (std::size_t j = 0; j < dim; ++j) {
      query_data[q * dim + j] = static_cast<float>(item_data[r * dim + j] + 1.2 * rng.normal());
    }
    relevance.pairs.push_back({query_ids[q], item_ids[r]});
  }
  return {EmbeddingMatrix(item_ids, std::move(item_data), dim, MatrixKind::Item),
          EmbeddingMatrix(query_ids, std::move(query_data), dim, MatrixKind::Query),
          std::move(relevance)};
}

SequentialFixture nearest_neighbor_sessions(std::size_t items, std::size_t sessions,
                                            std::size_t dim, std::uint64_t seed) {
  EmbeddingMatrix matrix = gaussian_matrix(items, dim, seed, MatrixKind::Item, "it");
  Rng rng(seed ^ 0x5e55107ULL);
  SessionLog log;
  for (std::size_t s = 0; s < sessions; ++s) {
    const std::size_t length = 3 + rng.below(6);  // 3..8
    std::vector<std::size_t> path{static_cast<std::size_t>(rng.below(items))};
    std::unordered_set<std::size_t> used(path.begin(), path.end());
    while (path.size() < length) {
      const float* cur = matrix.row(path.back()).data();
      std::size_t best = items;
      double best_score = -2.0;
      for (std::size_t r = 0; r < items; ++r) {
        if (used.count(r)) continue;
        const double score = cosine(cur, matrix.row(r).data(), dim);
        if (score > best_score) {
          best_score = score;
          best = r;
        }
      }
      path.push_back(best);
      used.insert(best);
    }
    Session session{make_id("u", s), {}};
    for (std::size_t r : path) session.items.push_back(matrix.id(r));
    log.sessions.push_back(std::move(session));
  }
  return {std::move(matrix), std::move(log)};
}

EmbeddingMatrix rank_one_line(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> data;
  data.reserve(rows * 2);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto v = static_cast<float>(3.0 * rng.normal() / std::sqrt(2.0));
    data.push_back(v);
    data.push_back(v);
  }
  return EmbeddingMatrix(make_ids("p", rows), std::move(data), 2, MatrixKind::Item);
}

EmbeddingMatrix hadamard_design(const std::vector<double>& variances) {
  const std::size_t d = variances.size();
  // Columns 1..d of the 16x16 Sylvester-Hadamard matrix are mutually
  // orthogonal with zero mean; a 17th all-zero row keeps the mean at zero and
  // makes the (n-1) divisor equal to the column norm 16.
  std::vector<float> data;
  for (std::size_t i = 0; i < 17; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (i < 16) v = (std::popcount(i & (j + 1)) % 2 ? -1.0 : 1.0) * std::sqrt(variances[j]);
      data.push_back(static_cast<float>(v));
    }
  }
  return EmbeddingMatrix(make_ids("h", 17), std::move(data), d, MatrixKind::Item);
}

SearchFixture signal_noise_corpus(std::size_t items, std::size_t queries, std::size_t dim,
                                  std::size_t signal_dim, double noise_sd, double query_jitter,
                                  std::uint64_t seed) {
  Rng rng(seed);
  // Random rotation so the signal subspace is not axis-aligned.
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  const Eigen::MatrixXd rotation = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();

  auto embed = [&](const Eigen::VectorXd& signal, double sd, float* out) {
    Eigen::VectorXd latent = Eigen::VectorXd::Zero(dim);
    latent.head(signal_dim) = signal;
    if (sd > 0.0) {
      for (std::size_t j = signal_dim; j < dim; ++j) latent(j) = sd * rng.normal();
    }
    const Eigen::VectorXd x = rotation * latent;
    for (std::size_t j = 0; j < dim; ++j) out[j] = static_cast<float>(x(j));
  };

  std::vector<Eigen::VectorXd> signals(items, Eigen::VectorXd(signal_dim));
  std::vector<float> item_data(items * dim);
  for (std::size_t i = 0; i < items; ++i) {
    for (std::size_t j = 0; j < signal_dim; ++j) signals[i](j) = rng.normal();
    embed(signals[i], noise_sd, item_data.data() + i * dim);
  }
  const auto relevant = sample_without_replacement(rng, items, queries);
  std::vector<float> query_data(queries * dim);
  RelevanceSet relevance;
  const auto item_ids = make_ids("item", items);
  const auto query_ids = make_ids("q", queries);
  for (std::size_t q = 0; q < queries; ++q) {
    Eigen::VectorXd s = signals[relevant[q]];
    for (std::size_t j = 0; j < signal_dim; ++j) s(j) += query_jitter * rng.normal();
    embed(s, noise_sd, query_data.data() + q * dim);
    relevance.pairs.push_back({query_ids[q], item_ids[relevant[q]]});
  }
  return {EmbeddingMatrix(item_ids, std::move(item_data), dim, MatrixKind::Item),
          EmbeddingMatrix(query_ids, std::move(query_data), dim, MatrixKind::Query),
          std::move(relevance)};
}

}  // namespace embedgeom::testing
