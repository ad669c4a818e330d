#pragma once
// Small conveniences shared by the unit suites.

#include <atomic>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <unistd.h>

#include "embedgeom/embedding_store.hpp"

namespace embedgeom::testing {

inline EmbeddingMatrix matrix(std::vector<std::string> ids,
                              std::initializer_list<std::vector<float>> rows,
                              MatrixKind kind = MatrixKind::Item) {
  std::vector<float> data;
  std::size_t dim = 0;
  for (const auto& r : rows) {
    dim = r.size();
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(std::move(ids), std::move(data), dim, kind);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("embedgeom_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(EMBEDGEOM_FIXTURE_DIR) / name;
}

}  // namespace embedgeom::testing
