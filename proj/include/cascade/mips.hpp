#pragma once

#include "cascade/embedding_matrix.hpp"

#include <string>
#include <vector>

namespace cascade {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
};

// Ordered answers for one query: scores non-increasing, ties broken by
// ascending article id, no duplicates.
struct RankedList {
  std::string qid;
  std::vector<ScoredDoc> entries;
};

// Descending score, then ascending id — the ordering every ranked artifact
// in the system uses.
inline bool ranked_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

// Inner product accumulated in double, left to right.
double dot_f32(const float* a, const float* b, std::size_t n);

// Exact top-min(K,N) by inner product via an exhaustive scan of the matrix.
RankedList mips_search(const EmbeddingMatrix& matrix, const std::vector<float>& query_vec,
                       std::size_t k, const std::string& qid);

} // namespace cascade
