#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace cascade {

struct Article {
  std::string id;
  std::string title;
  std::string abstract_text;
};

// In-memory corpus with id lookup. Duplicate ids are rejected at load time.
class Corpus {
public:
  Corpus() = default;
  explicit Corpus(std::vector<Article> articles);

  void add(Article article);

  const std::vector<Article>& articles() const { return articles_; }
  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }

  bool contains(const std::string& id) const;
  // Throws DataError if the id does not resolve.
  const Article& by_id(const std::string& id) const;
  const Article& at(std::size_t i) const { return articles_[i]; }

  // JSON-lines, one object per article: {"id","title","abstract"}.
  static Corpus load_jsonl(const std::string& path);
  void save_jsonl(const std::string& path) const;

private:
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> index_;
};

} // namespace cascade
