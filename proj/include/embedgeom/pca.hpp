#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embedgeom/embedding_store.hpp"

namespace embedgeom {

/// Components whose eigenvalue falls below this fraction of the leading one
/// are treated as numerically zero and dropped from the model.
inline constexpr double kRankTolerance = 1e-10;

/// Principal subspace of a (sub-sampled) item corpus.
///
/// `basis` is stored column-major (d x r): column j is the j-th principal
/// direction, sorted by descending eigenvalue, sign-canonicalized so that its
/// largest-magnitude entry is positive (lowest index wins ties). Mean and
/// basis are held in f32, the same precision they are persisted with, so a
/// model behaves identically before and after a save/load round trip.
class PcaModel {
 public:
  PcaModel(std::vector<float> mean, std::vector<float> basis, std::vector<double> spectrum,
           std::uint64_t sample_size, std::uint64_t seed);

  /// Analytic model with an identity-like basis, for spectrum-only analysis.
  static PcaModel from_spectrum(std::vector<double> spectrum);

  std::size_t source_dim() const { return mean_.size(); }
  std::size_t rank() const { return spectrum_.size(); }
  std::uint64_t sample_size() const { return sample_size_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const float> mean() const { return mean_; }
  std::span<const float> basis() const { return basis_; }
  std::span<const float> component(std::size_t j) const {
    return {basis_.data() + j * source_dim(), source_dim()};
  }
  std::span<const double> spectrum() const { return spectrum_; }
  std::span<const double> cumulative_ratio() const { return cumulative_; }

 private:
  std::vector<float> mean_;
  std::vector<float> basis_;
  std::vector<double> spectrum_;
  std::vector<double> cumulative_;
  std::uint64_t sample_size_;
  std::uint64_t seed_;
};

/// Fits PCA on a seeded uniform sample of `sample_size` item rows (all rows
/// when sample_size >= N). Throws InputError for sample_size < 2 and
/// NumericalError for a zero-variance sample.
PcaModel fit_pca(const EmbeddingMatrix& items, std::uint64_t sample_size, std::uint64_t seed);

/// Row indices fit_pca uses for the given (N, sample_size, seed), ascending.
std::vector<std::size_t> pca_sample_rows(std::size_t rows, std::uint64_t sample_size,
                                         std::uint64_t seed);

/// r_k: share of total variance in the top k components, 1 <= k <= rank.
double explained_variance_ratio(const PcaModel& model, std::size_t k);

/// d(eps): smallest k with r_k >= eps; eps = 1 yields the rank.
std::size_t effective_dimension(const PcaModel& model, double epsilon);

/// Maps each row x to basis[:, :k]^T (x - mean). Ids and kind are preserved.
EmbeddingMatrix project(const PcaModel& model, const EmbeddingMatrix& vectors, std::size_t k);

/// Subtracts the model's item mean from every row, without rotating.
EmbeddingMatrix center(const PcaModel& model, const EmbeddingMatrix& vectors);
/// Subtracts an explicit mean vector from every row.
EmbeddingMatrix center(std::span<const float> mean, const EmbeddingMatrix& vectors);

/// Column means of all rows, accumulated in f64 and rounded to f32.
std::vector<float> column_mean(const EmbeddingMatrix& matrix);

std::string encode_epca(const PcaModel& model);
PcaModel decode_epca(std::string_view bytes, std::string_view source = "<memory>");
void save_pca(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace embedgeom
