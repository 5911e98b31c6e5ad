#include "cascade/bm25.hpp"

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cascade {

void Bm25Config::validate() const {
  if (!(k1 >= 0.0)) throw UsageError("bm25: k1 must be >= 0");
  if (!(b >= 0.0 && b <= 1.0)) throw UsageError("bm25: b must lie in [0, 1]");
}

Bm25Index::Bm25Index(const Corpus& corpus, Bm25Config cfg) : corpus_(&corpus), cfg_(cfg) {
  cfg_.validate();
  if (corpus.empty()) throw DataError("bm25: empty corpus");
  term_counts_.resize(corpus.size());
  lengths_.resize(corpus.size());
  std::size_t total_length = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Article& a = corpus.at(i);
    const std::vector<std::string> words = split_words(a.title + " " + a.abstract_text);
    lengths_[i] = words.size();
    total_length += words.size();
    for (const std::string& w : words) ++term_counts_[i][w];
    for (const auto& [term, count] : term_counts_[i]) {
      (void)count;
      ++doc_freq_[term];
    }
  }
  avg_length_ = static_cast<double>(total_length) / static_cast<double>(corpus.size());
}

double Bm25Index::score(const std::string& query, std::size_t doc_index) const {
  if (doc_index >= term_counts_.size()) throw UsageError("bm25: doc index out of range");
  const double n = static_cast<double>(term_counts_.size());
  const auto& counts = term_counts_[doc_index];
  const double length_norm =
      cfg_.k1 * (1.0 - cfg_.b + cfg_.b * static_cast<double>(lengths_[doc_index]) / avg_length_);
  double total = 0.0;
  for (const std::string& term : split_words(query)) {
    const auto tf_it = counts.find(term);
    if (tf_it == counts.end()) continue;
    const double tf = static_cast<double>(tf_it->second);
    const double df = static_cast<double>(doc_freq_.at(term));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    total += idf * tf * (cfg_.k1 + 1.0) / (tf + length_norm);
  }
  return total;
}

RankedList Bm25Index::rank(const std::string& qid, const std::string& query,
                           std::size_t top_k) const {
  if (top_k < 1) throw UsageError("bm25: top_k must be >= 1");
  std::vector<ScoredDoc> scored;
  scored.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    scored.push_back({corpus_->at(i).id, score(query, i)});
  }
  const std::size_t keep = std::min(top_k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), ranked_before);
  scored.resize(keep);
  RankedList list;
  list.qid = qid;
  list.entries = std::move(scored);
  return list;
}

} // namespace cascade
