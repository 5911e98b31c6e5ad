#include "cascade/search.hpp"

#include "cascade/errors.hpp"
#include "cascade/tokenizer.hpp"

#include <algorithm>
#include <cstring>

namespace cascade {

void encode_corpus_range(const nn::EncoderConfig& config, const nn::ParameterSet<float>& params,
                         const std::string& prefix, const Vocab& vocab, const Corpus& corpus,
                         std::size_t first, std::size_t last, std::size_t chunk_size,
                         EmbeddingMatrix& out) {
  if (chunk_size < 1) throw UsageError("encode_corpus: chunk size must be >= 1");
  if (last > corpus.size() || first > last) throw UsageError("encode_corpus: bad row range");
  if (out.dim != config.hidden || out.rows() != corpus.size()) {
    throw UsageError("encode_corpus: output matrix shape mismatch");
  }
  for (std::size_t start = first; start < last; start += chunk_size) {
    const std::size_t end = std::min(start + chunk_size, last);
    std::vector<TokenSequence> batch;
    batch.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      const Article& a = corpus.at(i);
      batch.push_back(tokenize_document(vocab, a.title, a.abstract_text, config.max_doc));
    }
    const nn::Tensor<float> rows = nn::encode_sequences(config, params, prefix, batch);
    for (std::size_t i = start; i < end; ++i) {
      std::memcpy(out.row(i), rows.ptr() + (i - start) * config.hidden,
                  config.hidden * sizeof(float));
    }
  }
}

EmbeddingMatrix encode_corpus(const nn::EncoderConfig& config,
                              const nn::ParameterSet<float>& params, const std::string& prefix,
                              const Vocab& vocab, const Corpus& corpus, std::size_t chunk_size) {
  EmbeddingMatrix out;
  out.dim = config.hidden;
  out.ids.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) out.ids.push_back(corpus.at(i).id);
  out.values.resize(corpus.size() * out.dim);
  encode_corpus_range(config, params, prefix, vocab, corpus, 0, corpus.size(), chunk_size, out);
  return out;
}

RankedList rerank(const nn::EncoderConfig& config, const nn::ParameterSet<float>& cross_params,
                  const Vocab& vocab, const std::string& query, const RankedList& candidates,
                  const Corpus& corpus, std::size_t chunk_size) {
  if (chunk_size < 1) throw UsageError("rerank: chunk size must be >= 1");
  RankedList out;
  out.qid = candidates.qid;
  out.entries.reserve(candidates.entries.size());

  for (std::size_t start = 0; start < candidates.entries.size(); start += chunk_size) {
    const std::size_t end = std::min(start + chunk_size, candidates.entries.size());
    std::vector<TokenSequence> batch;
    batch.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      const Article& a = corpus.by_id(candidates.entries[i].doc_id);
      batch.push_back(tokenize_pair(vocab, query, a.title, a.abstract_text, config.max_query,
                                    config.max_doc));
    }
    nn::ModelGraph<float> model(config);
    const auto tower = model.bind(cross_params, "");
    const nn::Var cls = model.encode(tower, batch);
    const nn::Var scores = model.head_scores(tower, cls);
    const nn::Tensor<float>& sv = model.g().value(scores);
    if (!sv.all_finite()) throw NumericError("rerank: non-finite cross-encoder score");
    for (std::size_t i = start; i < end; ++i) {
      out.entries.push_back(
          {candidates.entries[i].doc_id, static_cast<double>(sv.data[i - start])});
    }
  }
  std::stable_sort(out.entries.begin(), out.entries.end(), ranked_before);
  return out;
}

RankedList two_stage_search(const nn::EncoderConfig& retr_config,
                            const nn::ParameterSet<float>& retr_params,
                            const nn::EncoderConfig& cross_config,
                            const nn::ParameterSet<float>& cross_params,
                            const EmbeddingMatrix& index, const Corpus& corpus,
                            const Vocab& vocab, const std::string& qid, const std::string& query,
                            std::size_t k) {
  const std::vector<float> q_vec =
      nn::encode_query_vec(retr_config, retr_params, "qenc.", vocab, query);
  const RankedList first_stage = mips_search(index, q_vec, k, qid);
  return rerank(cross_config, cross_params, vocab, query, first_stage, corpus);
}

} // namespace cascade
