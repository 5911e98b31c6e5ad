#pragma once

#include "cascade/article.hpp"
#include "cascade/click.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cascade {

// One search-log entry: a query and the articles it clicked. The
// navigational flag stands in for an upstream intent classifier verdict.
struct LogRecord {
  std::string qid;
  std::string query;
  bool navigational = false;
  std::vector<std::pair<std::string, std::uint64_t>> clicks; // (article id, count), id-sorted
};

// term -> replacement candidates; used to build queries with zero lexical
// overlap against their clicked article.
struct SynonymTable {
  std::map<std::string, std::vector<std::string>> terms;

  static SynonymTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

struct LogGenConfig {
  std::size_t keyword_count = 0;      // verbatim title samples
  std::size_t nonkeyword_count = 0;   // synonym-substituted phrases
  std::size_t navigational_count = 0; // flagged, dropped by curation
  double zipf_exponent = 1.5;         // click-count law P(c) ~ c^-s
  std::uint64_t zipf_max = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

// Synthesizes a click log whose records are classified correctly by
// construction: keyword queries are contiguous title slices of their clicked
// article (so the exact-mention rule fires), non-keyword queries substitute
// every term through the synonym table and are audited to share zero words
// with the clicked article. Fully seeded.
std::vector<LogRecord> generate_logs(const LogGenConfig& cfg, const Corpus& corpus,
                                     const SynonymTable& synonyms);

// Drops flagged records; keeps order.
std::vector<LogRecord> filter_navigational(const std::vector<LogRecord>& records);

// True iff the query is a single word, or every clicked article's
// title+abstract contains the whole query as a contiguous word-boundary
// match (case-insensitive).
bool is_keyword_query(const LogRecord& record, const Corpus& corpus);

// Deduplicated (query, article) pairs with clicks summed, ordered by
// (query id, article id).
std::vector<ClickPair> extract_pairs(const std::vector<LogRecord>& records);

struct TrainingSets {
  std::vector<ClickPair> retriever; // every informational pair
  std::vector<ClickPair> reranker;  // non-keyword queries only
};

// The curation split: retriever trains on everything informational, the
// re-ranker only on queries the keyword rule rejects.
TrainingSets split_training_sets(const std::vector<LogRecord>& records, const Corpus& corpus);

// JSON-lines {"qid","query","navigational":bool,"clicks":{id:count,...}}.
std::vector<LogRecord> load_logs(const std::filesystem::path& path);
void save_logs(const std::filesystem::path& path, const std::vector<LogRecord>& records);

} // namespace cascade
