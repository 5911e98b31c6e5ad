#include "cascade/log.hpp"

#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace cascade {

using nlohmann::json;

void LogGenConfig::validate() const {
  if (zipf_exponent <= 0.0) throw UsageError("log generation: Zipf exponent must be > 0");
  if (zipf_max < 1) throw UsageError("log generation: Zipf maximum must be >= 1");
}

namespace {

// Truncated discrete Zipf: P(c) ~ c^-s on [1, maxv], by inverse CDF.
class ZipfSampler {
public:
  ZipfSampler(double s, std::uint64_t maxv) {
    cumulative_.reserve(maxv);
    double total = 0.0;
    for (std::uint64_t k = 1; k <= maxv; ++k) {
      total += std::pow(static_cast<double>(k), -s);
      cumulative_.push_back(total);
    }
  }

  std::uint64_t sample(Rng& rng) const {
    const double u = rng.uniform_real() * cumulative_.back();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::uint64_t>(it - cumulative_.begin()) + 1;
  }

private:
  std::vector<double> cumulative_;
};

std::vector<std::string> article_words(const Article& a) {
  return split_words(a.title + " " + a.abstract_text);
}

std::string join_words(const std::vector<std::string>& words, std::size_t start,
                       std::size_t len) {
  std::string out;
  for (std::size_t i = start; i < start + len; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

// Random article with at least min_words usable words.
std::size_t pick_article(const Corpus& corpus, Rng& rng, std::size_t min_words) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::size_t i = rng.uniform_index(corpus.size());
    if (article_words(corpus.at(i)).size() >= min_words) return i;
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (article_words(corpus.at(i)).size() >= min_words) return i;
  }
  throw DataError("log generation: no article has " + std::to_string(min_words) +
                  " usable words");
}

std::string format_qid(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "q%06zu", n);
  return buf;
}

} // namespace

std::vector<LogRecord> generate_logs(const LogGenConfig& cfg, const Corpus& corpus,
                                     const SynonymTable& synonyms) {
  cfg.validate();
  if (corpus.empty()) throw DataError("log generation: empty corpus");
  Rng rng(derive_seed(cfg.seed, "loggen"));
  const ZipfSampler zipf(cfg.zipf_exponent, cfg.zipf_max);
  std::vector<LogRecord> out;
  out.reserve(cfg.keyword_count + cfg.nonkeyword_count + cfg.navigational_count);
  std::size_t qnum = 0;

  // Keyword block: the query is a verbatim word slice of the clicked
  // article, so the exact-mention rule holds by construction.
  for (std::size_t i = 0; i < cfg.keyword_count; ++i) {
    const Article& a = corpus.at(pick_article(corpus, rng, 1));
    const std::vector<std::string> words = article_words(a);
    const std::size_t len = 1 + rng.uniform_index(std::min<std::size_t>(3, words.size()));
    const std::size_t start = rng.uniform_index(words.size() - len + 1);
    LogRecord rec;
    rec.qid = format_qid(qnum++);
    rec.query = join_words(words, start, len);
    rec.clicks.emplace_back(a.id, zipf.sample(rng));
    out.push_back(std::move(rec));
  }

  // Non-keyword block: a multi-word slice with every term replaced through
  // the synonym table; the result is audited to share no word with the
  // clicked article, which also guarantees the keyword rule cannot fire.
  for (std::size_t i = 0; i < cfg.nonkeyword_count; ++i) {
    const Article& a = corpus.at(pick_article(corpus, rng, 2));
    const std::vector<std::string> words = article_words(a);
    const std::unordered_set<std::string> word_set(words.begin(), words.end());
    const std::size_t len =
        2 + rng.uniform_index(std::min<std::size_t>(3, words.size() - 1));
    const std::size_t start = rng.uniform_index(words.size() - len + 1);
    std::string query;
    for (std::size_t w = start; w < start + len; ++w) {
      const auto it = synonyms.terms.find(words[w]);
      if (it == synonyms.terms.end() || it->second.empty()) {
        throw DataError("log generation: synonym table has no entry for term '" + words[w] +
                        "'");
      }
      const std::string& sub = it->second[rng.uniform_index(it->second.size())];
      if (word_set.count(sub) != 0) {
        throw DataError("log generation: synonym '" + sub + "' for term '" + words[w] +
                        "' appears in article " + a.id + "; table is not overlap-free");
      }
      if (!query.empty()) query += ' ';
      query += sub;
    }
    LogRecord rec;
    rec.qid = format_qid(qnum++);
    rec.query = std::move(query);
    rec.clicks.emplace_back(a.id, zipf.sample(rng));
    out.push_back(std::move(rec));
  }

  // Navigational block: source-style lookups, flagged for the filter stage.
  for (std::size_t i = 0; i < cfg.navigational_count; ++i) {
    const Article& a = corpus.at(pick_article(corpus, rng, 1));
    const std::vector<std::string> words = article_words(a);
    LogRecord rec;
    rec.qid = format_qid(qnum++);
    rec.query = "journal of " + words[rng.uniform_index(words.size())];
    rec.navigational = true;
    rec.clicks.emplace_back(a.id, 1);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<LogRecord> filter_navigational(const std::vector<LogRecord>& records) {
  std::vector<LogRecord> out;
  out.reserve(records.size());
  for (const LogRecord& rec : records) {
    if (!rec.navigational) out.push_back(rec);
  }
  return out;
}

bool is_keyword_query(const LogRecord& record, const Corpus& corpus) {
  const std::vector<std::string> words = split_words(record.query);
  if (words.size() == 1) return true;
  if (words.empty()) return false;
  for (const auto& [doc_id, count] : record.clicks) {
    (void)count;
    const Article& a = corpus.by_id(doc_id);
    if (!contains_phrase(a.title + " " + a.abstract_text, record.query)) return false;
  }
  return true;
}

std::vector<ClickPair> extract_pairs(const std::vector<LogRecord>& records) {
  // qid -> (query text, doc id -> summed clicks); std::map keeps the output
  // ordered by (qid, doc id).
  std::map<std::string, std::pair<std::string, std::map<std::string, std::uint64_t>>> agg;
  for (const LogRecord& rec : records) {
    auto& slot = agg[rec.qid];
    if (slot.first.empty()) slot.first = rec.query;
    for (const auto& [doc_id, count] : rec.clicks) slot.second[doc_id] += count;
  }
  std::vector<ClickPair> out;
  for (const auto& [qid, slot] : agg) {
    for (const auto& [doc_id, clicks] : slot.second) {
      out.push_back({qid, slot.first, doc_id, clicks});
    }
  }
  return out;
}

TrainingSets split_training_sets(const std::vector<LogRecord>& records, const Corpus& corpus) {
  std::vector<LogRecord> nonkeyword;
  for (const LogRecord& rec : records) {
    if (!is_keyword_query(rec, corpus)) nonkeyword.push_back(rec);
  }
  TrainingSets sets;
  sets.retriever = extract_pairs(records);
  sets.reranker = extract_pairs(nonkeyword);
  return sets;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synonym table: " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError(path.string() + ": synonym table must be a JSON object");
  }
  SynonymTable table;
  for (const auto& [term, value] : j.items()) {
    if (split_words(term).size() != 1 || split_words(term)[0] != term) {
      throw DataError(path.string() + ": synonym key '" + term +
                      "' is not a single lowercase word");
    }
    if (!value.is_array() || value.empty()) {
      throw DataError(path.string() + ": synonyms for '" + term +
                      "' must be a non-empty array");
    }
    std::vector<std::string> subs;
    for (const auto& s : value) {
      if (!s.is_string()) throw DataError(path.string() + ": non-string synonym for '" + term + "'");
      const std::string word = s.get<std::string>();
      if (split_words(word).size() != 1 || split_words(word)[0] != word) {
        throw DataError(path.string() + ": synonym '" + word + "' for '" + term +
                        "' is not a single lowercase word");
      }
      subs.push_back(word);
    }
    table.terms.emplace(term, std::move(subs));
  }
  return table;
}

void SynonymTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open synonym table for writing: " + path.string());
  json j = json::object();
  for (const auto& [term, subs] : terms) j[term] = subs;
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<LogRecord> load_logs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log file: " + path.string());
  std::vector<LogRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError(where + ": invalid JSON object");
    LogRecord rec;
    try {
      rec.qid = j.at("qid").get<std::string>();
      rec.query = j.at("query").get<std::string>();
      rec.navigational = j.at("navigational").get<bool>();
      const json& clicks = j.at("clicks");
      if (!clicks.is_object()) throw DataError(where + ": clicks must be an object");
      for (const auto& [doc_id, count] : clicks.items()) {
        const std::uint64_t c = count.get<std::uint64_t>();
        if (c < 1) throw DataError(where + ": click count must be >= 1");
        rec.clicks.emplace_back(doc_id, c);
      }
    } catch (const json::exception&) {
      throw DataError(where + ": malformed log record");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void save_logs(const std::filesystem::path& path, const std::vector<LogRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open log file for writing: " + path.string());
  for (const LogRecord& rec : records) {
    json clicks = json::object();
    for (const auto& [doc_id, count] : rec.clicks) clicks[doc_id] = count;
    const json j{{"qid", rec.qid},
                 {"query", rec.query},
                 {"navigational", rec.navigational},
                 {"clicks", clicks}};
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

} // namespace cascade
