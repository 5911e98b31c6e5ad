#include "cascade/tokenizer.hpp"

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

#include <algorithm>

namespace cascade {

namespace {

void require_room(std::size_t max_len, std::size_t min_needed, const char* what) {
  if (max_len < min_needed) {
    throw UsageError(std::string(what) + ": max length " + std::to_string(max_len) +
                     " below minimum " + std::to_string(min_needed));
  }
}

void push_words(const Vocab& vocab, const std::vector<std::string>& words, std::size_t count,
                std::vector<std::int32_t>& ids) {
  for (std::size_t i = 0; i < count; ++i) ids.push_back(vocab.id_of(words[i]));
}

TokenSequence finish(std::vector<std::int32_t> ids, std::size_t max_len) {
  TokenSequence seq;
  seq.mask_len = ids.size();
  ids.resize(max_len, Vocab::kPad);
  seq.ids = std::move(ids);
  return seq;
}

} // namespace

TokenSequence tokenize_query(const Vocab& vocab, std::string_view text, std::size_t max_len) {
  require_room(max_len, 3, "tokenize_query");
  const std::vector<std::string> words = split_words(text);
  const std::size_t take = std::min(words.size(), max_len - 2);
  std::vector<std::int32_t> ids;
  ids.reserve(max_len);
  ids.push_back(Vocab::kCls);
  push_words(vocab, words, take, ids);
  ids.push_back(Vocab::kSep);
  return finish(std::move(ids), max_len);
}

TokenSequence tokenize_document(const Vocab& vocab, std::string_view title,
                                std::string_view abstract, std::size_t max_len) {
  require_room(max_len, 3, "tokenize_document");
  const std::vector<std::string> title_words = split_words(title);
  const std::vector<std::string> abstract_words = split_words(abstract);
  const std::size_t budget = max_len - 3; // CLS + two SEPs
  const std::size_t title_take = std::min(title_words.size(), budget);
  const std::size_t abstract_take = std::min(abstract_words.size(), budget - title_take);
  std::vector<std::int32_t> ids;
  ids.reserve(max_len);
  ids.push_back(Vocab::kCls);
  push_words(vocab, title_words, title_take, ids);
  ids.push_back(Vocab::kSep);
  push_words(vocab, abstract_words, abstract_take, ids);
  ids.push_back(Vocab::kSep);
  return finish(std::move(ids), max_len);
}

TokenSequence tokenize_pair(const Vocab& vocab, std::string_view query, std::string_view title,
                            std::string_view abstract, std::size_t max_query,
                            std::size_t max_len) {
  require_room(max_len, 4, "tokenize_pair");
  require_room(max_query, 3, "tokenize_pair");
  const std::vector<std::string> query_words = split_words(query);
  std::vector<std::string> doc_words = split_words(title);
  {
    std::vector<std::string> abstract_words = split_words(abstract);
    doc_words.insert(doc_words.end(), std::make_move_iterator(abstract_words.begin()),
                     std::make_move_iterator(abstract_words.end()));
  }
  // CLS + q + SEP + d + SEP; the query budget is its own cap, then the
  // document fills what remains of max_len.
  const std::size_t query_take =
      std::min({query_words.size(), max_query - 2, max_len - 3});
  const std::size_t doc_take = std::min(doc_words.size(), max_len - 3 - query_take);
  std::vector<std::int32_t> ids;
  ids.reserve(max_len);
  ids.push_back(Vocab::kCls);
  push_words(vocab, query_words, query_take, ids);
  ids.push_back(Vocab::kSep);
  push_words(vocab, doc_words, doc_take, ids);
  ids.push_back(Vocab::kSep);
  return finish(std::move(ids), max_len);
}

} // namespace cascade
