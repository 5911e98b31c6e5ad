#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cascade {

// Row-major f32 document embeddings plus the parallel article-id list.
// Immutable once built; the whole search stack reads it concurrently.
struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<float> values; // rows() * dim

  std::size_t rows() const { return ids.size(); }
  const float* row(std::size_t i) const { return values.data() + i * dim; }
  float* row(std::size_t i) { return values.data() + i * dim; }

  // Shape consistency + finiteness; throws on violation.
  void validate() const;
};

// Index file: magic "MEDV", u32 version, u64 N, u32 h, N id records
// (u32 length + bytes), then N*h little-endian f32 values.
void save_index(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix load_index(const std::filesystem::path& path);

} // namespace cascade
