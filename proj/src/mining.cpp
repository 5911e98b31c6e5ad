#include "cascade/mining.hpp"

#include "cascade/mips.hpp"
#include "cascade/rng.hpp"

#include <algorithm>
#include <unordered_set>

namespace cascade {

std::optional<RerankInstance> mine_local_negatives(const EmbeddingMatrix& index,
                                                   const std::vector<float>& query_vec,
                                                   const ClickPair& pair,
                                                   const std::vector<std::string>& clicked_ids,
                                                   const RerankTrainConfig& cfg,
                                                   std::uint64_t seed, const WarnFn& warn) {
  cfg.validate();
  const std::size_t n = index.rows();
  const std::unordered_set<std::string> clicked(clicked_ids.begin(), clicked_ids.end());

  std::vector<std::string> window;
  if (cfg.window_lo <= n) {
    const RankedList ranking = mips_search(index, query_vec, n, pair.qid);
    const std::size_t last = std::min(cfg.window_hi, n); // 1-based inclusive
    for (std::size_t rank = cfg.window_lo; rank <= last; ++rank) {
      const std::string& id = ranking.entries[rank - 1].doc_id;
      if (clicked.count(id) == 0) window.push_back(id);
    }
  }
  if (window.empty()) {
    if (warn) {
      warn("mining: query '" + pair.qid + "' has an empty negative window after exclusions; " +
           "instance skipped");
    }
    return std::nullopt;
  }

  RerankInstance inst;
  inst.qid = pair.qid;
  inst.query = pair.query;
  inst.pos = pair.doc_id;
  inst.clicks = pair.clicks;
  const std::size_t take = std::min(cfg.negatives, window.size());
  Rng rng(derive_seed(seed, "mine/" + pair.qid));
  std::vector<std::size_t> picks = rng.sample_without_replacement(window.size(), take);
  std::sort(picks.begin(), picks.end()); // keep retriever-rank order
  inst.negs.reserve(take);
  for (const std::size_t p : picks) inst.negs.push_back(window[p]);
  return inst;
}

} // namespace cascade
