#pragma once

#include "cascade/article.hpp"
#include "cascade/mips.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace cascade {

struct Bm25Config {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const;
};

// Bag-of-words lexical baseline over title + abstract, sharing the word
// splitter used by the neural tokenizer so both pipelines see the same terms.
class Bm25Index {
public:
  explicit Bm25Index(const Corpus& corpus, Bm25Config cfg = {});

  double score(const std::string& query, std::size_t doc_index) const;
  RankedList rank(const std::string& qid, const std::string& query, std::size_t top_k) const;

  std::size_t size() const { return term_counts_.size(); }
  double average_length() const { return avg_length_; }

private:
  const Corpus* corpus_;
  Bm25Config cfg_;
  std::vector<std::unordered_map<std::string, std::uint32_t>> term_counts_;
  std::unordered_map<std::string, std::size_t> doc_freq_;
  std::vector<std::size_t> lengths_;
  double avg_length_ = 0.0;
};

} // namespace cascade
