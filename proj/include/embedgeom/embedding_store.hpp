#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace embedgeom {

enum class MatrixKind { Item, Query };

std::string_view to_string(MatrixKind kind);

/// Row-major f32 matrix of embeddings keyed by unique string ids.
///
/// Validated on construction (non-empty, rectangular, finite, unique ids) and
/// immutable afterwards, so it may be shared freely across threads.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::vector<std::string> ids, std::vector<float> data, std::size_t dim,
                  MatrixKind kind);

  std::size_t rows() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  MatrixKind kind() const { return kind_; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const { return data_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::optional<std::size_t> find(const std::string& id) const;
  /// Row index of `id`; throws InputError when absent.
  std::size_t index_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::size_t dim_;
  MatrixKind kind_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct RelevancePair {
  std::string query_id;
  std::string item_id;
};

/// One ground-truth item per query, in file order.
struct RelevanceSet {
  std::vector<RelevancePair> pairs;
};

struct Session {
  std::string user_id;
  std::vector<std::string> items;  // chronological, length >= 2
};

struct SessionLog {
  std::vector<Session> sessions;
};

enum class EmbeddingFormat { Evec, Tsv };

/// Loads an EVEC or embedding-TSV file; the format is detected from the magic bytes.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, MatrixKind expected_kind);

/// Parses embedding-TSV text. `source` is used in error messages only.
EmbeddingMatrix parse_embeddings_tsv(std::string_view text, MatrixKind kind,
                                     std::string_view source = "<memory>");
/// Decodes an EVEC image.
EmbeddingMatrix parse_embeddings_evec(std::string_view bytes, MatrixKind kind,
                                      std::string_view source = "<memory>");

std::string encode_evec(const EmbeddingMatrix& matrix);
/// Shortest round-trip decimal rendering, so TSV -> load is lossless.
std::string encode_tsv(const EmbeddingMatrix& matrix);

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      EmbeddingFormat format);

RelevanceSet load_relevance(const std::filesystem::path& path, const EmbeddingMatrix& items,
                            const EmbeddingMatrix& queries);
RelevanceSet parse_relevance(std::string_view text, const EmbeddingMatrix& items,
                             const EmbeddingMatrix& queries);

SessionLog load_sessions(const std::filesystem::path& path, const EmbeddingMatrix& items);
SessionLog parse_sessions(std::string_view text, const EmbeddingMatrix& items);

/// Whole-file read; throws InputError naming the path on failure.
std::string read_file(const std::filesystem::path& path);

}  // namespace embedgeom
