#include "embedgeom/embedding_store.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "embedgeom/error.hpp"
#include "binary_io.hpp"
#include "embedgeom/report_io.hpp"

namespace embedgeom {

namespace {

using detail::get_le;
using detail::put_le;

constexpr std::string_view kEvecMagic = "EVEC";
constexpr std::uint32_t kEvecVersion = 1;
constexpr std::size_t kEvecHeaderSize = 28;

// Splits text into lines, dropping a trailing '\r'. Yields (1-based line number, line).
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    pos = end + 1;
  }
}

bool is_skippable(std::string_view line) {
  return line.empty() || line.front() == '#' ||
         line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                                   : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

}  // namespace

std::string_view to_string(MatrixKind kind) { return kind == MatrixKind::Item ? "item" : "query"; }

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, std::vector<float> data,
                                 std::size_t dim, MatrixKind kind)
    : ids_(std::move(ids)), data_(std::move(data)), dim_(dim), kind_(kind) {
  if (ids_.empty()) throw InputError("embedding matrix has no rows");
  if (dim_ == 0) throw InputError("embedding dimension must be positive");
  if (data_.size() != ids_.size() * dim_) {
    throw InputError("embedding data holds " + std::to_string(data_.size()) +
                     " values, expected " + std::to_string(ids_.size()) + " x " +
                     std::to_string(dim_));
  }
  index_.reserve(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    auto [it, inserted] = index_.emplace(ids_[r], r);
    if (!inserted) {
      throw InputError("duplicate id " + ids_[r] + " (rows " + std::to_string(it->second + 1) +
                       " and " + std::to_string(r + 1) + ")");
    }
    for (std::size_t c = 0; c < dim_; ++c) {
      if (!std::isfinite(data_[r * dim_ + c])) {
        throw InputError("non-finite value at row " + std::to_string(r + 1) + " (id " + ids_[r] +
                         ", column " + std::to_string(c + 1) + ")");
      }
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingMatrix::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw InputError("unknown " + std::string(to_string(kind_)) + " id " + id);
  }
  return it->second;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw InputError(path.string() + ": read failure");
  return std::move(buffer).str();
}

EmbeddingMatrix parse_embeddings_tsv(std::string_view text, MatrixKind kind,
                                     std::string_view source) {
  std::vector<std::string> ids;
  std::vector<float> data;
  std::size_t dim = 0;
  const std::string where = std::string(source) + ": ";
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_skippable(line)) return;
    const std::size_t row = ids.size() + 1;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw InputError(where + "missing tab separator on line " + std::to_string(line_no));
    }
    std::string id(line.substr(0, tab));
    if (id.empty()) throw InputError(where + "empty id on line " + std::to_string(line_no));
    const auto fields = split(line.substr(tab + 1), ',');
    if (dim == 0) dim = fields.size();
    if (fields.size() != dim) {
      throw InputError(where + "inconsistent row width at id " + id + " (row " +
                       std::to_string(row) + ": expected " + std::to_string(dim) +
                       " values, got " + std::to_string(fields.size()) + ")");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string field = trim(fields[c]);
      float value = 0.0f;
      const auto* first = field.data();
      const auto* last = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (field.empty() || ptr != last || ec == std::errc::invalid_argument) {
        throw InputError(where + "malformed value '" + field + "' at row " + std::to_string(row) +
                         " (id " + id + ", column " + std::to_string(c + 1) + ")");
      }
      if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
        throw InputError(where + "non-finite value at row " + std::to_string(row) + " (id " + id +
                         ", column " + std::to_string(c + 1) + ")");
      }
      data.push_back(value);
    }
    ids.push_back(std::move(id));
  });
  if (ids.empty()) throw InputError(where + "no embedding rows");
  try {
    return EmbeddingMatrix(std::move(ids), std::move(data), dim, kind);
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  }
}

EmbeddingMatrix parse_embeddings_evec(std::string_view bytes, MatrixKind kind,
                                      std::string_view source) {
  const std::string where = std::string(source) + ": ";
  if (bytes.size() < kEvecHeaderSize || bytes.substr(0, 4) != kEvecMagic) {
    throw InputError(where + "malformed header (missing EVEC magic)");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  const auto dim = get_le<std::uint32_t>(bytes, 8);
  const auto count = get_le<std::uint64_t>(bytes, 12);
  const auto dtype = static_cast<unsigned char>(bytes[20]);
  if (version != kEvecVersion) {
    throw InputError(where + "malformed header: unsupported version " + std::to_string(version));
  }
  if (dtype != 0) throw InputError(where + "malformed header: unsupported dtype " + std::to_string(dtype));
  for (std::size_t i = 21; i < kEvecHeaderSize; ++i) {
    if (bytes[i] != 0) throw InputError(where + "malformed header: reserved bytes not zero");
  }
  if (dim == 0) throw InputError(where + "malformed header: dim is 0");
  if (count == 0) throw InputError(where + "malformed header: count is 0");
  const std::size_t row_bytes = std::size_t{dim} * 4;
  // Each record needs at least 2 + dim*4 bytes; reject absurd counts before allocating.
  if (count > (bytes.size() - kEvecHeaderSize) / (2 + row_bytes)) {
    throw InputError(where + "truncated file: header declares " + std::to_string(count) +
                     " rows");
  }

  std::vector<std::string> ids;
  std::vector<float> data;
  ids.reserve(count);
  data.reserve(count * dim);
  std::size_t offset = kEvecHeaderSize;
  for (std::uint64_t r = 0; r < count; ++r) {
    if (offset + 2 > bytes.size()) {
      throw InputError(where + "truncated record at row " + std::to_string(r + 1));
    }
    const auto id_len = get_le<std::uint16_t>(bytes, offset);
    offset += 2;
    if (offset + id_len + row_bytes > bytes.size()) {
      throw InputError(where + "truncated record at row " + std::to_string(r + 1));
    }
    ids.emplace_back(bytes.substr(offset, id_len));
    offset += id_len;
    for (std::uint32_t c = 0; c < dim; ++c) {
      data.push_back(std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset)));
      offset += 4;
    }
  }
  if (offset != bytes.size()) {
    throw InputError(where + "trailing bytes after " + std::to_string(count) + " records");
  }
  try {
    return EmbeddingMatrix(std::move(ids), std::move(data), dim, kind);
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  }
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, MatrixKind expected_kind) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == kEvecMagic) {
    return parse_embeddings_evec(bytes, expected_kind, path.string());
  }
  if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == "EPCA") {
    throw InputError(path.string() + ": is a PCA model file, not embeddings");
  }
  return parse_embeddings_tsv(bytes, expected_kind, path.string());
}

std::string encode_evec(const EmbeddingMatrix& matrix) {
  std::string out;
  out.reserve(kEvecHeaderSize + matrix.rows() * (2 + 16 + matrix.dim() * 4));
  out.append(kEvecMagic);
  put_le<std::uint32_t>(out, kEvecVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.rows());
  out.push_back('\0');               // dtype f32
  out.append(7, '\0');               // reserved
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const std::string& id = matrix.id(r);
    if (id.size() > 0xffff) throw InputError("id longer than 65535 bytes at row " + std::to_string(r + 1));
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.append(id);
    for (float v : matrix.row(r)) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::string encode_tsv(const EmbeddingMatrix& matrix) {
  std::string out;
  char buf[64];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out.append(matrix.id(r));
    out.push_back('\t');
    bool first = true;
    for (float v : matrix.row(r)) {
      if (!first) out.push_back(',');
      first = false;
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out.append(buf, ptr);
    }
    out.push_back('\n');
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      EmbeddingFormat format) {
  write_file_atomic(path, format == EmbeddingFormat::Evec ? encode_evec(matrix) : encode_tsv(matrix));
}

RelevanceSet parse_relevance(std::string_view text, const EmbeddingMatrix& items,
                             const EmbeddingMatrix& queries) {
  RelevanceSet set;
  std::unordered_map<std::string, std::size_t> first_line;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_skippable(line)) return;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw InputError("malformed relevance line " + std::to_string(line_no) +
                       " (expected query_id<TAB>item_id)");
    }
    std::string query_id(fields[0]);
    std::string item_id(fields[1]);
    if (!queries.find(query_id)) {
      throw InputError("unknown query id " + query_id + " (line " + std::to_string(line_no) + ")");
    }
    if (!items.find(item_id)) {
      throw InputError("unknown item id " + item_id + " (line " + std::to_string(line_no) + ")");
    }
    auto [it, inserted] = first_line.emplace(query_id, line_no);
    if (!inserted) {
      throw InputError("duplicate query id " + query_id + " (lines " + std::to_string(it->second) +
                       " and " + std::to_string(line_no) + ")");
    }
    set.pairs.push_back({std::move(query_id), std::move(item_id)});
  });
  if (set.pairs.empty()) throw InputError("no relevance pairs");
  return set;
}

RelevanceSet load_relevance(const std::filesystem::path& path, const EmbeddingMatrix& items,
                            const EmbeddingMatrix& queries) {
  try {
    return parse_relevance(read_file(path), items, queries);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

SessionLog parse_sessions(std::string_view text, const EmbeddingMatrix& items) {
  SessionLog log;
  std::unordered_map<std::string, std::size_t> first_line;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_skippable(line)) return;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw InputError("malformed session line " + std::to_string(line_no) +
                       " (expected user_id<TAB>item,item,...)");
    }
    Session session{std::string(line.substr(0, tab)), {}};
    // Sessions are reported per user id, so ids must be unique.
    auto [seen, inserted] = first_line.emplace(session.user_id, line_no);
    if (!inserted) {
      throw InputError("duplicate session id " + session.user_id + " (lines " +
                       std::to_string(seen->second) + " and " + std::to_string(line_no) + ")");
    }
    for (std::string_view field : split(line.substr(tab + 1), ',')) {
      std::string item = trim(field);
      if (item.empty()) {
        throw InputError("empty item id in session " + session.user_id + " (line " +
                         std::to_string(line_no) + ")");
      }
      if (!items.find(item)) {
        throw InputError("unknown item id " + item + " in session " + session.user_id +
                         " (line " + std::to_string(line_no) + ")");
      }
      session.items.push_back(std::move(item));
    }
    if (session.items.size() < 2) {
      throw InputError("session " + session.user_id + " has length " +
                       std::to_string(session.items.size()) + " < 2");
    }
    log.sessions.push_back(std::move(session));
  });
  if (log.sessions.empty()) throw InputError("no sessions");
  return log;
}

SessionLog load_sessions(const std::filesystem::path& path, const EmbeddingMatrix& items) {
  try {
    return parse_sessions(read_file(path), items);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace embedgeom
