#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cascade {

// One curated (query, clicked article, click count) training pair.
struct ClickPair {
  std::string qid;
  std::string query;
  std::string doc_id;
  std::uint64_t clicks = 1;
};

struct RetrieverTrainConfig {
  std::size_t batch = 32;       // in-batch negatives come from these rows
  float alpha = 0.8f;           // query-to-document share of the loss
  std::size_t accum_steps = 8;  // micro-batches per optimizer step
  std::size_t total_steps = 0;  // optimizer steps
  std::size_t warmup_steps = 0;
  float lr = 2e-5f;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 0; // optimizer steps; 0 = final only

  void validate() const;
};

struct RerankTrainConfig {
  std::size_t negatives = 31;  // M per instance
  std::size_t window_lo = 50;  // first mined rank e (1-based, inclusive)
  std::size_t window_hi = 200; // last mined rank f (inclusive)
  std::size_t batch = 32;      // instances per optimizer step
  std::size_t total_steps = 0;
  std::size_t warmup_steps = 0;
  float lr = 2e-5f;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 0;

  void validate() const;
};

// A query with its clicked positive and mined hard negatives.
struct RerankInstance {
  std::string qid;
  std::string query;
  std::string pos;
  std::vector<std::string> negs;
  std::uint64_t clicks = 1;
};

// w_i = log2(c_i + 1) / sum_k log2(c_k + 1); weights sum to one.
std::vector<double> click_weights(const std::vector<std::uint64_t>& clicks);

// JSON-lines: {"qid","query","doc_id","clicks"} per row.
std::vector<ClickPair> load_click_pairs(const std::filesystem::path& path);
void save_click_pairs(const std::filesystem::path& path, const std::vector<ClickPair>& pairs);

// JSON-lines: {"qid","query","pos","negs":[...],"clicks"} per row.
std::vector<RerankInstance> load_rerank_instances(const std::filesystem::path& path);
void save_rerank_instances(const std::filesystem::path& path,
                           const std::vector<RerankInstance>& instances);

} // namespace cascade
