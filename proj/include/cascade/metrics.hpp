#pragma once

#include "cascade/mips.hpp"

#include <map>
#include <string>
#include <vector>

namespace cascade {

// query id -> (article id -> integer relevance grade >= 0).
using Qrels = std::map<std::string, std::map<std::string, int>>;

// query id -> ranked answers for that query.
using Run = std::map<std::string, RankedList>;

// Mean over evaluated queries plus the per-query breakdown. Queries whose
// judgments contain no positive grade are skipped entirely.
struct MetricReport {
  double mean = 0.0;
  std::map<std::string, double> per_query;
};

// Graded ranking quality: gain 2^grade - 1, discount log2(rank + 1),
// normalized by the ideal ordering truncated at k.
MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k);

// Binary mean average precision at cutoff k, normalized by min(k, #relevant).
MetricReport map_at_k(const Run& run, const Qrels& qrels, std::size_t k);

// Sample Pearson correlation; throws when either input has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

} // namespace cascade
