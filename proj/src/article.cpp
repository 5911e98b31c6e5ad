#include "cascade/article.hpp"

#include "cascade/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace cascade {

Corpus::Corpus(std::vector<Article> articles) {
  for (auto& a : articles) add(std::move(a));
}

void Corpus::add(Article article) {
  auto [it, inserted] = index_.emplace(article.id, articles_.size());
  if (!inserted) throw DataError("duplicate article id: " + article.id);
  articles_.push_back(std::move(article));
}

bool Corpus::contains(const std::string& id) const {
  return index_.count(id) != 0;
}

const Article& Corpus::by_id(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unresolvable article id: " + id);
  return articles_[it->second];
}

Corpus Corpus::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    if (!j.contains("id") || !j.contains("title")) {
      throw DataError(path + ":" + std::to_string(lineno) + ": article needs id and title");
    }
    Article a;
    a.id = j.at("id").get<std::string>();
    a.title = j.at("title").get<std::string>();
    a.abstract_text = j.value("abstract", std::string());
    corpus.add(std::move(a));
  }
  return corpus;
}

void Corpus::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& a : articles_) {
    nlohmann::json j;
    j["id"] = a.id;
    j["title"] = a.title;
    j["abstract"] = a.abstract_text;
    out << j.dump() << '\n';
  }
}

} // namespace cascade
