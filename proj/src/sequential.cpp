#include "embedgeom/sequential.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "embedgeom/error.hpp"
#include "embedgeom/parallel.hpp"

namespace embedgeom {

Aggregator::Kind parse_aggregator(std::string_view name) {
  if (name == "last" || name == "last-item") return Aggregator::Kind::LastItem;
  if (name == "mean") return Aggregator::Kind::Mean;
  if (name == "exp-decay" || name == "exp_decay") return Aggregator::Kind::ExpDecay;
  throw InputError("unknown aggregator '" + std::string(name) + "' (expected last, mean, exp-decay)");
}

std::string_view to_string(Aggregator::Kind kind) {
  switch (kind) {
    case Aggregator::Kind::LastItem: return "last";
    case Aggregator::Kind::Mean: return "mean";
    case Aggregator::Kind::ExpDecay: return "exp-decay";
  }
  return "?";
}

std::vector<double> aggregate(std::span<const std::span<const float>> history, const Aggregator& agg) {
  if (history.empty()) throw InputError("cannot aggregate an empty history");
  const std::size_t dim = history.front().size();
  for (const auto& v : history) {
    if (v.size() != dim) throw InputError("history vectors differ in dimension");
  }
  std::vector<double> h(dim, 0.0);
  switch (agg.kind) {
    case Aggregator::Kind::LastItem:
      for (std::size_t c = 0; c < dim; ++c) h[c] = history.back()[c];
      return h;
    case Aggregator::Kind::Mean:
    case Aggregator::Kind::ExpDecay: {
      double lambda = 1.0;
      if (agg.kind == Aggregator::Kind::ExpDecay) {
        if (!(agg.lambda > 0.0 && agg.lambda <= 1.0)) {
          throw InputError("decay lambda must lie in (0, 1], got " + std::to_string(agg.lambda));
        }
        lambda = agg.lambda;
      }
      // Weight of item j is lambda^(t-1-j); with lambda = 1 every weight is
      // exactly 1 and this reduces to the arithmetic mean bit for bit.
      const std::size_t t = history.size();
      std::vector<double> weights(t);
      double w = 1.0;
      for (std::size_t j = t; j-- > 0;) {
        weights[j] = w;
        w *= lambda;
      }
      double total = 0.0;
      for (std::size_t j = 0; j < t; ++j) {
        total += weights[j];
        for (std::size_t c = 0; c < dim; ++c) h[c] += weights[j] * history[j][c];
      }
      for (double& x : h) x /= total;
      return h;
    }
  }
  return h;
}

namespace {

struct SessionOutcome {
  std::size_t rank = 0;
  std::size_t degenerate = 0;
};

SessionOutcome rank_session(const Session& session, const EmbeddingMatrix& items,
                            const SequentialConfig& config) {
  const std::size_t t = session.items.size();
  std::vector<std::span<const float>> history;
  history.reserve(t - 1);
  for (std::size_t j = 0; j + 1 < t; ++j) history.push_back(items.row(items.index_of(session.items[j])));
  const std::vector<double> h = aggregate(history, config.aggregator);
  const std::span<const double> hv(h);

  const std::string& target_id = session.items.back();
  const std::size_t target = items.index_of(target_id);
  SessionOutcome outcome;
  auto score = [&](std::size_t row) {
    bool degenerate = false;
    const double s = similarity<double, float>(hv, items.row(row), config.measure, &degenerate);
    if (degenerate) ++outcome.degenerate;
    return s;
  };
  const double target_score = score(target);
  // Rank = 1 + #candidates that sort before the target (higher score, or
  // equal score with a smaller id).
  auto beats_target = [&](std::size_t row) {
    const double s = score(row);
    return s > target_score || (s == target_score && items.id(row) < target_id);
  };

  std::size_t ahead = 0;
  if (config.scope == CandidateScope::SampledPool) {
    const JudgedQuery pool = sample_pool(session.user_id, target_id, items, config.pool_size, config.seed);
    for (std::size_t i = 1; i < pool.pool.size(); ++i) {
      if (beats_target(items.index_of(pool.pool[i]))) ++ahead;
    }
  } else {
    std::unordered_set<std::size_t> excluded;
    if (!config.include_history) {
      for (std::size_t j = 0; j + 1 < t; ++j) excluded.insert(items.index_of(session.items[j]));
    }
    for (std::size_t row = 0; row < items.rows(); ++row) {
      if (row == target || excluded.count(row)) continue;
      if (beats_target(row)) ++ahead;
    }
  }
  outcome.rank = ahead + 1;
  return outcome;
}

}  // namespace

MetricReport evaluate_sequential(const SessionLog& log, const EmbeddingMatrix& items,
                                 const SequentialConfig& config) {
  if (log.sessions.empty()) throw InputError("no sessions");
  if (config.cutoffs.empty()) throw InputError("at least one cutoff is required");
  if (config.scope == CandidateScope::SampledPool && items.rows() < config.pool_size + 1) {
    throw InputError("catalog of " + std::to_string(items.rows()) + " items is smaller than pool request " +
                     std::to_string(config.pool_size + 1));
  }
  const std::size_t count = log.sessions.size();
  std::vector<SessionOutcome> outcomes(count);
  parallel_for(count, config.workers, [&](std::size_t i) {
    if (log.sessions[i].items.size() < 2) {
      throw InputError("session " + log.sessions[i].user_id + " has length " +
                       std::to_string(log.sessions[i].items.size()) + " < 2");
    }
    outcomes[i] = rank_session(log.sessions[i], items, config);
  });
  std::map<std::string, std::size_t> ranks;
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!ranks.emplace(log.sessions[i].user_id, outcomes[i].rank).second) {
      throw InputError("duplicate session id " + log.sessions[i].user_id);
    }
    degenerate += outcomes[i].degenerate;
  }
  MetricReport report = report_from_ranks("sequential", ranks, config.cutoffs);
  report.degenerate_scores = degenerate;
  return report;
}

}  // namespace embedgeom
