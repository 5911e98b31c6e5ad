#include "cascade/vocab.hpp"

#include "cascade/errors.hpp"
#include "cascade/text.hpp"

#include <algorithm>
#include <fstream>

namespace cascade {

Vocab::Vocab() {
  append("[CLS]");
  append("[SEP]");
  append("[PAD]");
  append("[UNK]");
}

void Vocab::append(std::string token) {
  ids_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(const std::vector<std::string>& texts, std::size_t max_size) {
  if (max_size <= 4) throw UsageError("build_vocab: max_size must exceed the 4 special tokens");
  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string& word : split_words(text)) counts[std::move(word)] += 1;
  }
  if (counts.empty()) throw DataError("build_vocab: corpus has no words");

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  const std::size_t keep = std::min(ranked.size(), max_size - 4);
  for (std::size_t i = 0; i < keep; ++i) v.append(std::move(ranked[i].first));
  return v;
}

std::int32_t Vocab::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw UsageError("Vocab::token_of: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open vocabulary file for writing: " + path.string());
  for (const std::string& t : tokens_) out << t << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path.string());
  Vocab v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= 4) {
      // the four reserved rows must match what the constructor laid down
      if (line != v.tokens_[lineno - 1]) {
        throw DataError(path.string() + ":" + std::to_string(lineno) +
                        ": expected special token " + v.tokens_[lineno - 1] + ", got '" + line +
                        "'");
      }
      continue;
    }
    if (line.empty()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty token line");
    }
    if (v.ids_.count(line) != 0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate token '" +
                      line + "'");
    }
    v.append(line);
  }
  if (lineno < 4) throw DataError(path.string() + ": missing special token rows");
  return v;
}

} // namespace cascade
