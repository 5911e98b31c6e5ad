#include "cascade/trec.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace cascade {

namespace {

std::string location(const std::filesystem::path& path, std::size_t lineno) {
  return path.string() + ":" + std::to_string(lineno);
}

// Full-token numeric parse; partial consumption is a format error.
template <typename T>
T parse_number(const std::string& token, const std::string& where, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw DataError(where + ": malformed " + what + " '" + token + "'");
  }
  return value;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> fields;
  std::string token;
  while (ss >> token) fields.push_back(token);
  return fields;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

} // namespace

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open qrels file: " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.empty()) continue;
    const std::string where = location(path, lineno);
    if (fields.size() != 4) {
      throw DataError(where + ": expected 4 fields `qid 0 docid grade`, got " +
                      std::to_string(fields.size()));
    }
    const int grade = parse_number<int>(fields[3], where, "grade");
    if (grade < 0) throw DataError(where + ": negative grade");
    const auto [it, inserted] = qrels[fields[0]].emplace(fields[2], grade);
    (void)it;
    if (!inserted) {
      throw DataError(where + ": duplicate judgment for query " + fields[0] + ", doc " +
                      fields[2]);
    }
  }
  return qrels;
}

void save_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open qrels file for writing: " + path.string());
  for (const auto& [qid, grades] : qrels) {
    for (const auto& [doc_id, grade] : grades) {
      out << qid << " 0 " << doc_id << ' ' << grade << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Run load_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open run file: " + path.string());
  Run run;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.empty()) continue;
    const std::string where = location(path, lineno);
    if (fields.size() != 6) {
      throw DataError(where + ": expected 6 fields `qid Q0 docid rank score tag`, got " +
                      std::to_string(fields.size()));
    }
    if (fields[1] != "Q0") throw DataError(where + ": second field must be Q0");
    parse_number<std::uint64_t>(fields[3], where, "rank");
    const double score = parse_number<double>(fields[4], where, "score");
    RankedList& list = run[fields[0]];
    list.qid = fields[0];
    for (const ScoredDoc& existing : list.entries) {
      if (existing.doc_id == fields[2]) {
        throw DataError(where + ": duplicate doc " + fields[2] + " for query " + fields[0]);
      }
    }
    list.entries.push_back({fields[2], score});
  }
  // Normalize to the canonical ordering regardless of file order.
  for (auto& [qid, list] : run) {
    std::stable_sort(list.entries.begin(), list.entries.end(), ranked_before);
  }
  return run;
}

void write_run(const std::filesystem::path& path, const Run& run, const std::string& tag) {
  if (tag.empty()) throw UsageError("write_run: empty run tag");
  for (const char c : tag) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      throw UsageError("write_run: run tag must not contain whitespace");
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open run file for writing: " + path.string());
  for (const auto& [qid, list] : run) {
    std::size_t rank = 0;
    for (const ScoredDoc& entry : list.entries) {
      out << qid << " Q0 " << entry.doc_id << ' ' << ++rank << ' ' << format_double(entry.score)
          << ' ' << tag << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

} // namespace cascade
