#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "embedgeom/pca.hpp"
#include "embedgeom/retrieval.hpp"
#include "embedgeom/sequential.hpp"

namespace embedgeom {

/// Minimum absolute metric gap for a curve to count as rising or falling.
inline constexpr double kShapeThreshold = 0.002;

enum class CurveShape { InvertedU, Plateau, Degrading };
std::string_view to_string(CurveShape shape);

struct EpsilonMark {
  std::size_t components = 0;
  double metric = 0.0;
};

struct SweepCurve {
  std::string metric_name;
  bool auto_grid = false;
  std::vector<std::size_t> component_grid;  // strictly ascending
  std::vector<double> metric_at_k;
  std::map<double, EpsilonMark> epsilon_marks;
  double baseline_metric = 0.0;  // mean-centered, uncompressed embeddings
  CurveShape shape = CurveShape::Plateau;
  std::size_t rank = 0;
  // Seed traces of the search pools, identical for every k by construction.
  std::vector<std::uint64_t> pool_seed_traces;
};

/// Powers of two from 2 below the rank, the rank itself, and the d(eps) points.
std::vector<std::size_t> auto_grid(const PcaModel& model, const std::vector<double>& epsilons);

/// InvertedU: an interior point beats both the smallest-k value and the
/// full-rank value by more than `threshold`. Degrading: the full-rank value
/// beats every interior point by more than `threshold`. Otherwise Plateau.
/// Interior means every grid point other than the smallest k and the rank.
CurveShape classify_shape(const std::vector<std::size_t>& grid, const std::vector<double>& values,
                          std::size_t rank, double full_rank_value,
                          double threshold = kShapeThreshold);

struct SweepSpec {
  std::optional<std::vector<std::size_t>> grid;  // nullopt = auto
  std::vector<double> epsilons{0.80, 0.95, 1.00};
  std::string metric;  // empty: nDCG at the largest cutoff
};

/// Projects items and queries onto the top-k components for every k and
/// evaluates product search with identical pools at each point.
SweepCurve run_sweep(const EmbeddingMatrix& items, const EmbeddingMatrix& queries,
                     const RelevanceSet& relevance, const PcaModel& model, const SweepSpec& spec,
                     const SearchConfig& config);

/// Same sweep for next-item recommendation.
SweepCurve run_sequential_sweep(const EmbeddingMatrix& items, const SessionLog& log,
                                const PcaModel& model, const SweepSpec& spec,
                                const SequentialConfig& config);

}  // namespace embedgeom
