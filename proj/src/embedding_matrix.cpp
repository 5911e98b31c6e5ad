#include "cascade/embedding_matrix.hpp"

#include "cascade/binio.hpp"
#include "cascade/errors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace cascade {

namespace {

constexpr char kMagic[4] = {'M', 'E', 'D', 'V'};
constexpr std::uint32_t kVersion = 1;

} // namespace

void EmbeddingMatrix::validate() const {
  if (values.size() != ids.size() * dim) {
    throw DataError("embedding matrix: value count does not match rows x dim");
  }
  for (const float v : values) {
    if (!std::isfinite(v)) throw NumericError("embedding matrix: non-finite value");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& id : ids) {
    if (!seen.insert(id).second) throw DataError("embedding matrix: duplicate article id " + id);
  }
}

void save_index(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  matrix.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open index for writing: " + path.string());
  out.write(kMagic, 4);
  binio::write_u32(out, kVersion);
  binio::write_u64(out, matrix.rows());
  binio::write_u32(out, static_cast<std::uint32_t>(matrix.dim));
  for (const std::string& id : matrix.ids) binio::write_string(out, id);
  binio::write_f32_array(out, matrix.values.data(), matrix.values.size());
  if (!out) throw DataError("write failed: " + path.string());
}

EmbeddingMatrix load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open index: " + path.string());
  const std::string ctx = path.string();
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(ctx + ": not an index file (bad magic)");
  }
  const std::uint32_t version = binio::read_u32(in, ctx + " version");
  if (version != kVersion) {
    throw DataError(ctx + ": unsupported index version " + std::to_string(version));
  }
  const std::uint64_t n = binio::read_u64(in, ctx + " row count");
  EmbeddingMatrix m;
  m.dim = binio::read_u32(in, ctx + " dimension");
  m.ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) m.ids.push_back(binio::read_string(in, ctx + " ids"));
  m.values.resize(static_cast<std::size_t>(n) * m.dim);
  binio::read_f32_array(in, m.values.data(), m.values.size(), ctx + " values");
  m.validate();
  return m;
}

} // namespace cascade
