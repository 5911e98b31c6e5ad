#include "cascade/click.hpp"

#include "cascade/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace cascade {

using nlohmann::json;

void RetrieverTrainConfig::validate() const {
  if (batch < 2) throw UsageError("retriever training needs batch >= 2 for in-batch negatives");
  if (alpha < 0.0f || alpha > 1.0f) throw UsageError("alpha must lie in [0,1]");
  if (accum_steps < 1) throw UsageError("accum_steps must be >= 1");
  if (lr <= 0.0f) throw UsageError("lr must be > 0");
}

void RerankTrainConfig::validate() const {
  if (negatives < 1) throw UsageError("reranker training needs at least one negative");
  if (window_lo < 1 || window_lo > window_hi) {
    throw UsageError("mining window must satisfy 1 <= e <= f");
  }
  if (batch < 1) throw UsageError("batch must be >= 1");
  if (lr <= 0.0f) throw UsageError("lr must be > 0");
}

std::vector<double> click_weights(const std::vector<std::uint64_t>& clicks) {
  if (clicks.empty()) throw UsageError("click_weights: empty batch");
  double total = 0.0;
  std::vector<double> w(clicks.size());
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    if (clicks[i] < 1) throw DataError("click_weights: click count must be >= 1");
    w[i] = std::log2(static_cast<double>(clicks[i] + 1));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

namespace {

json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON object");
  }
  return j;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fn(parse_line(line, path, lineno), lineno);
  }
}

template <typename T>
T field(const json& j, const char* key, const std::filesystem::path& path, std::size_t lineno) {
  if (!j.contains(key)) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": missing field '" + key +
                    "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad value for '" + key +
                    "'");
  }
}

} // namespace

std::vector<ClickPair> load_click_pairs(const std::filesystem::path& path) {
  std::vector<ClickPair> pairs;
  for_each_line(path, [&](const json& j, std::size_t lineno) {
    ClickPair p;
    p.qid = field<std::string>(j, "qid", path, lineno);
    p.query = field<std::string>(j, "query", path, lineno);
    p.doc_id = field<std::string>(j, "doc_id", path, lineno);
    p.clicks = field<std::uint64_t>(j, "clicks", path, lineno);
    if (p.clicks < 1) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": clicks must be >= 1");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

void save_click_pairs(const std::filesystem::path& path, const std::vector<ClickPair>& pairs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  for (const ClickPair& p : pairs) {
    const json j{{"qid", p.qid}, {"query", p.query}, {"doc_id", p.doc_id}, {"clicks", p.clicks}};
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<RerankInstance> load_rerank_instances(const std::filesystem::path& path) {
  std::vector<RerankInstance> instances;
  for_each_line(path, [&](const json& j, std::size_t lineno) {
    RerankInstance inst;
    inst.qid = field<std::string>(j, "qid", path, lineno);
    inst.query = field<std::string>(j, "query", path, lineno);
    inst.pos = field<std::string>(j, "pos", path, lineno);
    inst.negs = field<std::vector<std::string>>(j, "negs", path, lineno);
    inst.clicks = field<std::uint64_t>(j, "clicks", path, lineno);
    if (inst.negs.empty()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty negative list");
    }
    for (const std::string& n : inst.negs) {
      if (n == inst.pos) {
        throw DataError(path.string() + ":" + std::to_string(lineno) +
                        ": positive listed among negatives");
      }
    }
    instances.push_back(std::move(inst));
  });
  return instances;
}

void save_rerank_instances(const std::filesystem::path& path,
                           const std::vector<RerankInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  for (const RerankInstance& inst : instances) {
    const json j{{"qid", inst.qid},
                 {"query", inst.query},
                 {"pos", inst.pos},
                 {"negs", inst.negs},
                 {"clicks", inst.clicks}};
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

} // namespace cascade
