#include "embedgeom/metrics.hpp"

#include <cmath>

#include "embedgeom/error.hpp"
#include "embedgeom/random.hpp"

namespace embedgeom {

namespace {

void check_rank_and_cutoff(std::size_t rank, std::size_t k) {
  if (rank < 1) throw InputError("rank must be >= 1");
  if (k < 1) throw InputError("cutoff k must be >= 1");
}

}  // namespace

double recall_at_k(std::size_t rank, std::size_t k) {
  check_rank_and_cutoff(rank, k);
  return rank <= k ? 1.0 : 0.0;
}

double ndcg_at_k(std::size_t rank, std::size_t k) {
  check_rank_and_cutoff(rank, k);
  if (rank > k) return 0.0;
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

std::string recall_name(std::size_t k) { return "R@" + std::to_string(k); }
std::string ndcg_name(std::size_t k) { return "N@" + std::to_string(k); }

void MetricReport::finalize() {
  aggregates.clear();
  if (per_unit.empty()) return;
  std::map<std::string, std::size_t> counts;
  for (const auto& [unit, values] : per_unit) {
    for (const auto& [name, value] : values) {
      aggregates[name] += value;
      ++counts[name];
    }
  }
  for (auto& [name, sum] : aggregates) {
    if (counts[name] != per_unit.size()) {
      throw InputError("metric " + name + " missing for some units");
    }
    sum /= static_cast<double>(per_unit.size());
  }
}

MetricReport report_from_ranks(std::string label, const std::map<std::string, std::size_t>& ranks,
                               const std::vector<std::size_t>& cutoffs) {
  MetricReport report;
  report.system_label = std::move(label);
  report.rank_of_relevant = ranks;
  for (const auto& [unit, rank] : ranks) {
    MetricValues& values = report.per_unit[unit];
    for (std::size_t k : cutoffs) {
      values[recall_name(k)] = recall_at_k(rank, k);
      values[ndcg_name(k)] = ndcg_at_k(rank, k);
    }
  }
  report.finalize();
  return report;
}

SignificanceResult sign_flip_test(const std::vector<double>& deltas, std::size_t resamples,
                                  std::uint64_t seed) {
  if (resamples < 1000) {
    throw InputError("resamples must be >= 1000, got " + std::to_string(resamples));
  }
  if (deltas.empty()) throw InputError("no paired units to test");
  const auto n = static_cast<double>(deltas.size());
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double d : deltas) {
    sum += d;
    abs_sum += std::abs(d);
  }
  const double observed = std::abs(sum / n);
  // Resampled sums are accumulated in a different order than the observed
  // one; allow for that rounding so exact ties count as ties.
  const double slack = 1e-10 * abs_sum / n;

  Rng rng(keyed_seed(seed, "sign-flip"));
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    double s = 0.0;
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      if (i % 64 == 0) bits = rng();
      s += (bits & 1U) ? deltas[i] : -deltas[i];
      bits >>= 1;
    }
    if (std::abs(s / n) >= observed - slack) ++extreme;
  }

  SignificanceResult result;
  result.mean_delta = sum / n;
  result.p_value = (1.0 + static_cast<double>(extreme)) / (1.0 + static_cast<double>(resamples));
  result.resamples = resamples;
  result.seed = seed;
  result.units = deltas.size();
  return result;
}

SignificanceResult paired_significance(const MetricReport& a, const MetricReport& b,
                                       const std::string& metric, std::size_t resamples,
                                       std::uint64_t seed) {
  std::vector<std::string> mismatched;
  for (const auto& [unit, values] : a.per_unit) {
    if (!b.per_unit.count(unit)) mismatched.push_back(unit);
  }
  for (const auto& [unit, values] : b.per_unit) {
    if (!a.per_unit.count(unit)) mismatched.push_back(unit);
  }
  if (!mismatched.empty()) {
    std::string message = "unit sets differ (" + std::to_string(mismatched.size()) + " ids):";
    for (std::size_t i = 0; i < mismatched.size() && i < 10; ++i) message += " " + mismatched[i];
    throw InputError(message);
  }
  std::vector<double> deltas;
  deltas.reserve(a.per_unit.size());
  for (const auto& [unit, values] : a.per_unit) {
    const auto& other = b.per_unit.at(unit);
    const auto ia = values.find(metric);
    const auto ib = other.find(metric);
    if (ia == values.end() || ib == other.end()) {
      throw InputError("metric " + metric + " absent for unit " + unit);
    }
    deltas.push_back(ia->second - ib->second);
  }
  SignificanceResult result = sign_flip_test(deltas, resamples, seed);
  result.metric = metric;
  return result;
}

}  // namespace embedgeom
