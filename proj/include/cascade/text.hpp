#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cascade {

// Lowercased maximal runs of [a-z0-9]; everything else separates tokens.
// This is the single word splitter shared by the tokenizer, the keyword
// rule, and the BM25 statistics, so all of them agree on word boundaries.
std::vector<std::string> split_words(std::string_view text);

std::string to_lower(std::string_view text);

// True iff `phrase` occurs as a contiguous run inside `text` after both are
// word-split. Equivalent to a case-insensitive substring match on word
// boundaries with punctuation treated as a boundary.
bool contains_phrase(std::string_view text, std::string_view phrase);

} // namespace cascade
