#pragma once

#include "cascade/article.hpp"
#include "cascade/click.hpp"
#include "cascade/encoder.hpp"

#include <functional>

namespace cascade {

// Observation points for the training loops; either hook may be empty.
struct TrainHooks {
  std::function<void(std::uint64_t step, float lr, float loss)> on_step;
  std::function<void(std::uint64_t step, const nn::ParameterSet<float>&)> on_checkpoint;
};

// Fresh two-tower retriever parameters under "qenc." / "denc." prefixes.
nn::ParameterSet<float> init_retriever_params(const nn::EncoderConfig& enc_cfg);

// Fresh cross-encoder parameters (single tower plus scalar head).
nn::ParameterSet<float> init_reranker_params(const nn::EncoderConfig& enc_cfg);

// Contrastive two-tower training over click pairs with in-batch negatives,
// gradient accumulation and a warmup+cosine schedule. Deterministic per
// config; returns the trained "qenc."/"denc." parameter set.
nn::ParameterSet<float> train_retriever(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                                        const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                                        const RetrieverTrainConfig& cfg,
                                        const TrainHooks* hooks = nullptr);

// Mean in-batch loss of a frozen retriever over held-out pairs (forward only).
float retriever_eval_loss(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                          const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                          const nn::ParameterSet<float>& params, std::size_t batch, float alpha);

// Cross-encoder training on mined instances; the batch loss is the
// click-weighted sum of per-instance negative log-likelihoods.
nn::ParameterSet<float> train_reranker(const std::vector<RerankInstance>& instances,
                                       const Corpus& corpus, const Vocab& vocab,
                                       const nn::EncoderConfig& enc_cfg,
                                       const RerankTrainConfig& cfg,
                                       const TrainHooks* hooks = nullptr);

// Mean per-instance loss of a frozen cross-encoder (forward only).
float reranker_eval_loss(const std::vector<RerankInstance>& instances, const Corpus& corpus,
                         const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                         const nn::ParameterSet<float>& params);

} // namespace cascade
