#include "embedgeom/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "embedgeom/parallel.hpp"
#include "embedgeom/random.hpp"

namespace embedgeom {

Measure parse_measure(std::string_view name) {
  if (name == "cosine") return Measure::Cosine;
  if (name == "dot") return Measure::Dot;
  if (name == "neg-euclidean" || name == "neg_euclidean") return Measure::NegEuclidean;
  throw InputError("unknown measure '" + std::string(name) + "' (expected cosine, dot, neg-euclidean)");
}

std::string_view to_string(Measure measure) {
  switch (measure) {
    case Measure::Cosine: return "cosine";
    case Measure::Dot: return "dot";
    case Measure::NegEuclidean: return "neg-euclidean";
  }
  return "?";
}

std::uint64_t unit_seed(std::uint64_t global_seed, std::string_view unit_id) {
  return keyed_seed(global_seed, unit_id);
}

JudgedQuery sample_pool(const std::string& query_id, const std::string& relevant_item_id,
                        const EmbeddingMatrix& items, std::size_t pool_size,
                        std::uint64_t global_seed) {
  if (pool_size < 1) throw InputError("pool size must be >= 1");
  if (items.rows() < pool_size + 1) {
    throw InputError("corpus too small for query " + query_id + ": " +
                     std::to_string(items.rows()) + " items cannot supply " +
                     std::to_string(pool_size) + " distinct distractors");
  }
  const std::size_t relevant = items.index_of(relevant_item_id);
  JudgedQuery judged;
  judged.query_id = query_id;
  judged.relevant_item_id = relevant_item_id;
  judged.seed_trace = unit_seed(global_seed, query_id);
  judged.pool.reserve(pool_size + 1);
  judged.pool.push_back(relevant_item_id);
  Rng rng(judged.seed_trace);
  // Sample from the N-1 non-relevant rows, then shift indices past the relevant one.
  for (std::uint64_t pick : sample_without_replacement(rng, items.rows() - 1, pool_size)) {
    const std::size_t row = pick < relevant ? pick : pick + 1;
    judged.pool.push_back(items.id(row));
  }
  return judged;
}

RankedList rank_query(const JudgedQuery& query, const EmbeddingMatrix& queries,
                      const EmbeddingMatrix& items, Measure measure) {
  const auto query_vec = queries.row(queries.index_of(query.query_id));
  const std::size_t size = query.pool.size();
  std::vector<double> scores(size);
  RankedList ranked;
  ranked.query_id = query.query_id;
  for (std::size_t i = 0; i < size; ++i) {
    bool degenerate = false;
    scores[i] = similarity(query_vec, items.row(items.index_of(query.pool[i])), measure, &degenerate);
    if (degenerate) ++ranked.degenerate_scores;
  }
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return query.pool[a] < query.pool[b];
  });
  ranked.item_ids.reserve(size);
  ranked.scores.reserve(size);
  for (std::size_t pos = 0; pos < size; ++pos) {
    ranked.item_ids.push_back(query.pool[order[pos]]);
    ranked.scores.push_back(scores[order[pos]]);
    if (query.pool[order[pos]] == query.relevant_item_id && ranked.rank_of_relevant == 0) {
      ranked.rank_of_relevant = pos + 1;
    }
  }
  if (ranked.rank_of_relevant == 0) {
    throw InputError("pool for query " + query.query_id + " does not contain its relevant item");
  }
  return ranked;
}

SearchRun run_search(const RelevanceSet& relevance, const EmbeddingMatrix& queries,
                     const EmbeddingMatrix& items, const SearchConfig& config) {
  if (relevance.pairs.empty()) throw InputError("empty relevance set");
  if (config.cutoffs.empty()) throw InputError("at least one cutoff is required");
  if (queries.dim() != items.dim()) {
    throw InputError("query dimension " + std::to_string(queries.dim()) +
                     " differs from item dimension " + std::to_string(items.dim()));
  }
  const std::size_t count = relevance.pairs.size();
  SearchRun run;
  run.pools.resize(count);
  std::vector<std::size_t> ranks(count);
  std::vector<std::size_t> degenerate(count);
  parallel_for(count, config.workers, [&](std::size_t i) {
    const auto& pair = relevance.pairs[i];
    run.pools[i] = sample_pool(pair.query_id, pair.item_id, items, config.pool_size, config.seed);
    const RankedList ranked = rank_query(run.pools[i], queries, items, config.measure);
    ranks[i] = ranked.rank_of_relevant;
    degenerate[i] = ranked.degenerate_scores;
  });
  std::map<std::string, std::size_t> by_query;
  for (std::size_t i = 0; i < count; ++i) by_query.emplace(relevance.pairs[i].query_id, ranks[i]);
  if (by_query.size() != count) throw InputError("duplicate query id in relevance set");
  run.report = report_from_ranks("search", by_query, config.cutoffs);
  run.report.degenerate_scores = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
  return run;
}

MetricReport evaluate_search(const RelevanceSet& relevance, const EmbeddingMatrix& queries,
                             const EmbeddingMatrix& items, const SearchConfig& config) {
  return run_search(relevance, queries, items, config).report;
}

}  // namespace embedgeom
