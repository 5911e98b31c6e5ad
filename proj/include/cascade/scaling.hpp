#pragma once

#include "cascade/metrics.hpp"
#include "cascade/trainer.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cascade {

struct ScalingPoint {
  std::size_t pairs = 0;
  double ndcg10 = 0.0;
};

// Data-scaling study: trains one retriever per ascending prefix size of the
// pair list (same seed, same step budget), indexes the corpus, runs
// retrieval for the shared eval queries and records NDCG@10. When
// `last_model` is non-null it receives the parameters trained on the final
// (largest) prefix.
std::vector<ScalingPoint> scaling_curve(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                                        const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                                        const RetrieverTrainConfig& train_cfg,
                                        const std::vector<std::size_t>& sizes,
                                        const std::map<std::string, std::string>& eval_queries,
                                        const Qrels& qrels,
                                        nn::ParameterSet<float>* last_model = nullptr);

} // namespace cascade
