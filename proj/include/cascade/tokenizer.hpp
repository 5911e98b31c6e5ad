#pragma once

#include "cascade/vocab.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace cascade {

// A fixed-length id sequence. ids.size() is always the configured max length;
// mask_len counts the real tokens before the PAD suffix.
struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::size_t mask_len = 0;
};

// [CLS] text [SEP] PAD...; text truncated to fit.
TokenSequence tokenize_query(const Vocab& vocab, std::string_view text, std::size_t max_len);

// [CLS] title [SEP] abstract [SEP] PAD...; the abstract is truncated before
// the title and both separators are always present.
TokenSequence tokenize_document(const Vocab& vocab, std::string_view title,
                                std::string_view abstract, std::size_t max_len);

// [CLS] query [SEP] title abstract [SEP] PAD... for the cross-encoder; the
// document side is truncated before the query. The query keeps its own
// max_query budget (CLS + words + SEP) so long queries cannot starve the
// document entirely; max_len bounds the whole sequence.
TokenSequence tokenize_pair(const Vocab& vocab, std::string_view query, std::string_view title,
                            std::string_view abstract, std::size_t max_query, std::size_t max_len);

} // namespace cascade
