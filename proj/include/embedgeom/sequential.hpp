#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "embedgeom/embedding_store.hpp"
#include "embedgeom/metrics.hpp"
#include "embedgeom/retrieval.hpp"

namespace embedgeom {

/// Training-free session encoder: maps an ordered history to one vector.
struct Aggregator {
  enum class Kind { LastItem, Mean, ExpDecay };
  Kind kind = Kind::LastItem;
  double lambda = 0.8;  // ExpDecay only, in (0, 1]

  static Aggregator last_item() { return {Kind::LastItem, 0.8}; }
  static Aggregator mean() { return {Kind::Mean, 0.8}; }
  static Aggregator exp_decay(double lambda) { return {Kind::ExpDecay, lambda}; }
};

Aggregator::Kind parse_aggregator(std::string_view name);
std::string_view to_string(Aggregator::Kind kind);

/// h = phi(history). LastItem returns the most recent vector; Mean the
/// average; ExpDecay weights item j of t by lambda^(t-1-j), normalized.
std::vector<double> aggregate(std::span<const std::span<const float>> history, const Aggregator& agg);

enum class CandidateScope { FullCatalog, SampledPool };

struct SequentialConfig {
  Aggregator aggregator;
  Measure measure = Measure::Cosine;
  std::vector<std::size_t> cutoffs{10, 50};
  CandidateScope scope = CandidateScope::FullCatalog;
  std::size_t pool_size = 50;     // SampledPool only
  bool include_history = false;   // FullCatalog: keep history items as candidates
  std::uint64_t seed = 42;
  std::size_t workers = 1;
};

/// Leave-last-out next-item evaluation: the final item of each session is the
/// target, the rest is the history. Per-session pools (SampledPool) are seeded
/// from (seed, user id), exactly like search pools.
MetricReport evaluate_sequential(const SessionLog& log, const EmbeddingMatrix& items,
                                 const SequentialConfig& config);

}  // namespace embedgeom
