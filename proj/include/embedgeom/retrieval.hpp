#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embedgeom/embedding_store.hpp"
#include "embedgeom/error.hpp"
#include "embedgeom/metrics.hpp"

namespace embedgeom {

/// Larger is always better: neg-euclidean is the negated L2 distance.
enum class Measure { Cosine, Dot, NegEuclidean };

Measure parse_measure(std::string_view name);
std::string_view to_string(Measure measure);

/// Similarity accumulated in f64 regardless of element type. Cosine with a
/// zero-norm operand scores 0 and sets *degenerate (if given).
template <class A, class B>
double similarity(std::span<const A> a, std::span<const B> b, Measure measure,
                  bool* degenerate = nullptr) {
  if (a.size() != b.size()) {
    throw InputError("similarity: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  switch (measure) {
    case Measure::Dot: {
      double dot = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
      }
      return dot;
    }
    case Measure::Cosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
      }
      if (na == 0.0 || nb == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
      }
      return dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case Measure::NegEuclidean: {
      double sq = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sq += diff * diff;
      }
      return -std::sqrt(sq);
    }
  }
  return 0.0;
}

inline double similarity(std::span<const float> a, std::span<const float> b, Measure measure,
                         bool* degenerate = nullptr) {
  return similarity<float, float>(a, b, measure, degenerate);
}

/// One evaluation unit: the relevant item plus seeded distractors.
struct JudgedQuery {
  std::string query_id;
  std::string relevant_item_id;
  std::vector<std::string> pool;  // [relevant, distractors...]
  std::uint64_t seed_trace = 0;

  bool operator==(const JudgedQuery&) const = default;
};

struct RankedList {
  std::string query_id;
  std::vector<std::string> item_ids;  // best first
  std::vector<double> scores;
  std::size_t rank_of_relevant = 0;  // 1-based
  std::size_t degenerate_scores = 0;
};

/// Per-unit seed: stable hash of (global seed, unit id bytes).
std::uint64_t unit_seed(std::uint64_t global_seed, std::string_view unit_id);

/// Ground truth plus `pool_size` distractors drawn uniformly without
/// replacement from the corpus minus the relevant item.
JudgedQuery sample_pool(const std::string& query_id, const std::string& relevant_item_id,
                        const EmbeddingMatrix& items, std::size_t pool_size,
                        std::uint64_t global_seed);

/// Scores the pool against the query and sorts by descending score, breaking
/// ties by ascending item id.
RankedList rank_query(const JudgedQuery& query, const EmbeddingMatrix& queries,
                      const EmbeddingMatrix& items, Measure measure);

struct SearchConfig {
  std::size_t pool_size = 50;
  Measure measure = Measure::Cosine;
  std::uint64_t seed = 42;
  std::vector<std::size_t> cutoffs{100};
  std::size_t workers = 1;
};

struct SearchRun {
  MetricReport report;
  std::vector<JudgedQuery> pools;  // in relevance-file order
};

/// Full product-search protocol; a query whose pool cannot be built aborts the run.
SearchRun run_search(const RelevanceSet& relevance, const EmbeddingMatrix& queries,
                     const EmbeddingMatrix& items, const SearchConfig& config);

MetricReport evaluate_search(const RelevanceSet& relevance, const EmbeddingMatrix& queries,
                             const EmbeddingMatrix& items, const SearchConfig& config);

}  // namespace embedgeom
