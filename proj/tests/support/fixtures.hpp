#pragma once

// Synthetic corpora for tests, the acceptance suite, and the shipped fixture
// files. Generation uses embedgeom::Rng (Box-Muller for normals).

#include <cstdint>
#include <string>
#include <vector>

#include "embedgeom/embedding_store.hpp"

namespace embedgeom::testing {

struct SearchFixture {
  EmbeddingMatrix items;
  EmbeddingMatrix queries;
  RelevanceSet relevance;
};

struct SequentialFixture {
  EmbeddingMatrix items;
  SessionLog sessions;
};

/// i.i.d. N(0, 1) rows with ids prefix0000...
EmbeddingMatrix gaussian_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                MatrixKind kind = MatrixKind::Item, const std::string& prefix = "r");

/// Seeded Gaussian mixture: items around 10 cluster centers, each query a
/// noisy copy of a distinct relevant item.
SearchFixture gaussian_mixture_search(std::size_t items, std::size_t queries, std::size_t dim,
                                      std::uint64_t seed);

/// Sessions built by repeatedly stepping to the cosine nearest neighbour of
/// the current item (excluding items already in the session).
SequentialFixture nearest_neighbor_sessions(std::size_t items, std::size_t sessions,
                                            std::size_t dim, std::uint64_t seed);

/// Points t*(1,1)/sqrt(2) in d=2: exactly rank 1.
EmbeddingMatrix rank_one_line(std::size_t rows, std::uint64_t seed);

/// 17 rows whose sample covariance is diag(variances) (Hadamard design plus a
/// zero row). Exact in f32 when every variance is a power of four.
EmbeddingMatrix hadamard_design(const std::vector<double>& variances);

/// Queries and items share a `signal_dim` subspace of R^dim; every other
/// direction carries independent noise with standard deviation `noise_sd`
/// (0 gives an exactly rank-`signal_dim` corpus). Queries are their relevant
/// item's signal plus `query_jitter` in-subspace perturbation, plus their own noise.
SearchFixture signal_noise_corpus(std::size_t items, std::size_t queries, std::size_t dim,
                                  std::size_t signal_dim, double noise_sd, double query_jitter,
                                  std::uint64_t seed);

}  // namespace embedgeom::testing
