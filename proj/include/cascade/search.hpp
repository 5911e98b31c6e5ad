#pragma once

#include "cascade/article.hpp"
#include "cascade/encoder.hpp"
#include "cascade/mips.hpp"

#include <string>

namespace cascade {

// Encodes corpus rows [first, last) into their fixed row slots of `out`,
// chunk_size sequences per forward pass. Row i depends only on article i, so
// any chunking (and any restart point) produces identical bytes.
void encode_corpus_range(const nn::EncoderConfig& config, const nn::ParameterSet<float>& params,
                         const std::string& prefix, const Vocab& vocab, const Corpus& corpus,
                         std::size_t first, std::size_t last, std::size_t chunk_size,
                         EmbeddingMatrix& out);

// Full offline corpus encoding pass.
EmbeddingMatrix encode_corpus(const nn::EncoderConfig& config,
                              const nn::ParameterSet<float>& params, const std::string& prefix,
                              const Vocab& vocab, const Corpus& corpus, std::size_t chunk_size);

// Re-scores the candidate set with the cross-encoder and reorders it
// (descending score, ties by ascending id). Pure permutation of the input.
RankedList rerank(const nn::EncoderConfig& config, const nn::ParameterSet<float>& cross_params,
                  const Vocab& vocab, const std::string& query, const RankedList& candidates,
                  const Corpus& corpus, std::size_t chunk_size = 16);

// encode_query -> mips_search -> rerank.
RankedList two_stage_search(const nn::EncoderConfig& retr_config,
                            const nn::ParameterSet<float>& retr_params,
                            const nn::EncoderConfig& cross_config,
                            const nn::ParameterSet<float>& cross_params,
                            const EmbeddingMatrix& index, const Corpus& corpus,
                            const Vocab& vocab, const std::string& qid, const std::string& query,
                            std::size_t k);

} // namespace cascade
