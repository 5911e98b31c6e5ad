#include "cascade/mips.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <numeric>

namespace cascade {

double dot_f32(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

RankedList mips_search(const EmbeddingMatrix& matrix, const std::vector<float>& query_vec,
                       std::size_t k, const std::string& qid) {
  if (query_vec.size() != matrix.dim) {
    throw UsageError("mips_search: query dimension " + std::to_string(query_vec.size()) +
                     " != index dimension " + std::to_string(matrix.dim));
  }
  if (k < 1) throw UsageError("mips_search: K must be >= 1");

  const std::size_t n = matrix.rows();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = dot_f32(query_vec.data(), matrix.row(i), matrix.dim);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t keep = std::min(k, n);
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return matrix.ids[a] < matrix.ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    before);

  RankedList out;
  out.qid = qid;
  out.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.entries.push_back({matrix.ids[order[i]], scores[order[i]]});
  }
  return out;
}

} // namespace cascade
