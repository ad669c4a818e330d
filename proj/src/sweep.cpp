#include "embedgeom/sweep.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "embedgeom/error.hpp"

namespace embedgeom {

std::string_view to_string(CurveShape shape) {
  switch (shape) {
    case CurveShape::InvertedU: return "InvertedU";
    case CurveShape::Plateau: return "Plateau";
    case CurveShape::Degrading: return "Degrading";
  }
  return "?";
}

std::vector<std::size_t> auto_grid(const PcaModel& model, const std::vector<double>& epsilons) {
  std::set<std::size_t> grid;
  const std::size_t rank = model.rank();
  for (std::size_t k = 2; k < rank; k *= 2) grid.insert(k);
  grid.insert(rank);
  for (double eps : epsilons) grid.insert(effective_dimension(model, eps));
  return {grid.begin(), grid.end()};
}

CurveShape classify_shape(const std::vector<std::size_t>& grid, const std::vector<double>& values,
                          std::size_t rank, double full_rank_value, double threshold) {
  if (grid.size() != values.size()) throw InputError("grid and values differ in length");
  if (grid.empty()) return CurveShape::Plateau;
  const std::size_t smallest = grid.front();
  const double smallest_value = values.front();
  std::vector<double> interior;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] != smallest && grid[i] != rank) interior.push_back(values[i]);
  }
  if (interior.empty()) return CurveShape::Plateau;
  for (double v : interior) {
    if (v > smallest_value + threshold && v > full_rank_value + threshold) return CurveShape::InvertedU;
  }
  const bool full_beats_all = std::all_of(interior.begin(), interior.end(), [&](double v) {
    return full_rank_value > v + threshold;
  });
  return full_beats_all ? CurveShape::Degrading : CurveShape::Plateau;
}

namespace {

std::vector<std::size_t> resolve_grid(const PcaModel& model, const SweepSpec& spec) {
  if (!spec.grid) return auto_grid(model, spec.epsilons);
  std::set<std::size_t> grid;
  for (std::size_t k : *spec.grid) {
    if (k < 1 || k > model.rank()) {
      throw InputError("grid component count k=" + std::to_string(k) + " outside [1, rank=" +
                       std::to_string(model.rank()) + "]");
    }
    grid.insert(k);
  }
  if (grid.empty()) throw InputError("empty component grid");
  return {grid.begin(), grid.end()};
}

using Evaluate = std::function<double(const EmbeddingMatrix& items, const EmbeddingMatrix* queries)>;

SweepCurve sweep_impl(const EmbeddingMatrix& items, const EmbeddingMatrix* queries,
                      const PcaModel& model, const SweepSpec& spec, std::string metric_name,
                      const Evaluate& evaluate) {
  SweepCurve curve;
  curve.metric_name = std::move(metric_name);
  curve.auto_grid = !spec.grid.has_value();
  curve.rank = model.rank();
  curve.component_grid = resolve_grid(model, spec);

  std::map<std::size_t, double> cache;
  auto at = [&](std::size_t k) {
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    const EmbeddingMatrix projected_items = project(model, items, k);
    double value = 0.0;
    if (queries) {
      const EmbeddingMatrix projected_queries = project(model, *queries, k);
      value = evaluate(projected_items, &projected_queries);
    } else {
      value = evaluate(projected_items, nullptr);
    }
    cache.emplace(k, value);
    return value;
  };

  for (std::size_t k : curve.component_grid) curve.metric_at_k.push_back(at(k));
  for (double eps : spec.epsilons) {
    const std::size_t k = effective_dimension(model, eps);
    curve.epsilon_marks[eps] = {k, at(k)};
  }
  {
    const EmbeddingMatrix centered_items = center(model, items);
    if (queries) {
      const EmbeddingMatrix centered_queries = center(model, *queries);
      curve.baseline_metric = evaluate(centered_items, &centered_queries);
    } else {
      curve.baseline_metric = evaluate(centered_items, nullptr);
    }
  }
  curve.shape = classify_shape(curve.component_grid, curve.metric_at_k, curve.rank,
                               curve.baseline_metric);
  return curve;
}

std::string default_metric(const std::string& requested, const std::vector<std::size_t>& cutoffs) {
  if (!requested.empty()) return requested;
  if (cutoffs.empty()) throw InputError("at least one cutoff is required");
  return ndcg_name(*std::max_element(cutoffs.begin(), cutoffs.end()));
}

double aggregate_of(const MetricReport& report, const std::string& metric) {
  const auto it = report.aggregates.find(metric);
  if (it == report.aggregates.end()) throw InputError("sweep metric " + metric + " is not computed");
  return it->second;
}

}  // namespace

SweepCurve run_sweep(const EmbeddingMatrix& items, const EmbeddingMatrix& queries,
                     const RelevanceSet& relevance, const PcaModel& model, const SweepSpec& spec,
                     const SearchConfig& config) {
  const std::string metric = default_metric(spec.metric, config.cutoffs);
  std::optional<std::vector<JudgedQuery>> first_pools;
  auto evaluate = [&](const EmbeddingMatrix& it, const EmbeddingMatrix* qs) {
    SearchRun run = run_search(relevance, *qs, it, config);
    if (!first_pools) {
      first_pools = std::move(run.pools);
    } else if (run.pools != *first_pools) {
      throw NumericalError("search pools changed across sweep points");
    }
    return aggregate_of(run.report, metric);
  };
  SweepCurve curve = sweep_impl(items, &queries, model, spec, metric, evaluate);
  for (const auto& pool : *first_pools) curve.pool_seed_traces.push_back(pool.seed_trace);
  return curve;
}

SweepCurve run_sequential_sweep(const EmbeddingMatrix& items, const SessionLog& log,
                                const PcaModel& model, const SweepSpec& spec,
                                const SequentialConfig& config) {
  const std::string metric = default_metric(spec.metric, config.cutoffs);
  auto evaluate = [&](const EmbeddingMatrix& it, const EmbeddingMatrix*) {
    return aggregate_of(evaluate_sequential(log, it, config), metric);
  };
  return sweep_impl(items, nullptr, model, spec, metric, evaluate);
}

}  // namespace embedgeom
