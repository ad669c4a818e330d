#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace embedgeom {

/// Hit indicator for a single relevant item: 1 when rank <= k.
double recall_at_k(std::size_t rank, std::size_t k);

/// Binary-gain nDCG with one relevant item: 1/log2(rank + 1) when rank <= k.
/// The ideal DCG is 1, so no normalization is needed.
double ndcg_at_k(std::size_t rank, std::size_t k);

/// "R@10", "N@100", ...
std::string recall_name(std::size_t k);
std::string ndcg_name(std::size_t k);

using MetricValues = std::map<std::string, double>;

/// Per-unit (query or session) metric values plus their unweighted means.
/// Units and metrics are kept in sorted order, so aggregation order is fixed.
struct MetricReport {
  std::string system_label;
  std::map<std::string, MetricValues> per_unit;
  std::map<std::string, std::size_t> rank_of_relevant;  // optional, per unit
  MetricValues aggregates;
  std::size_t degenerate_scores = 0;  // cosine evaluations with a zero-norm operand

  std::size_t unit_count() const { return per_unit.size(); }

  /// Recomputes `aggregates` as the arithmetic mean over units.
  void finalize();
};

/// Builds a report from per-unit ranks (1-based) at each cutoff.
MetricReport report_from_ranks(std::string label,
                               const std::map<std::string, std::size_t>& ranks,
                               const std::vector<std::size_t>& cutoffs);

struct SignificanceResult {
  std::string metric;
  double mean_delta = 0.0;  // A - B
  double p_value = 1.0;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
  std::size_t units = 0;
};

/// Smallest p-value a sign-flip test with this many resamples can report.
inline double p_value_floor(std::size_t resamples) { return 1.0 / (1.0 + static_cast<double>(resamples)); }

/// Two-sided paired sign-flip permutation test on per-unit deltas of `metric`.
/// Throws InputError if the unit sets differ (listing up to 10 offending ids)
/// or the metric is missing from either report.
SignificanceResult paired_significance(const MetricReport& a, const MetricReport& b,
                                       const std::string& metric, std::size_t resamples,
                                       std::uint64_t seed);

/// Same test on raw paired deltas.
SignificanceResult sign_flip_test(const std::vector<double>& deltas, std::size_t resamples,
                                  std::uint64_t seed);

}  // namespace embedgeom
