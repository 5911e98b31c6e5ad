#include "cascade/scaling.hpp"

#include "cascade/errors.hpp"
#include "cascade/search.hpp"

namespace cascade {

std::vector<ScalingPoint> scaling_curve(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                                        const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                                        const RetrieverTrainConfig& train_cfg,
                                        const std::vector<std::size_t>& sizes,
                                        const std::map<std::string, std::string>& eval_queries,
                                        const Qrels& qrels,
                                        nn::ParameterSet<float>* last_model) {
  if (sizes.empty()) throw UsageError("scaling curve: no sizes given");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw UsageError("scaling curve: size must be positive");
    if (i > 0 && sizes[i] == sizes[i - 1]) {
      throw UsageError("scaling curve: duplicate size " + std::to_string(sizes[i]));
    }
    if (i > 0 && sizes[i] < sizes[i - 1]) {
      throw UsageError("scaling curve: sizes must be ascending");
    }
    if (sizes[i] > pairs.size()) {
      throw DataError("scaling curve: size " + std::to_string(sizes[i]) + " exceeds the " +
                      std::to_string(pairs.size()) + " available pairs");
    }
  }
  if (eval_queries.empty()) throw DataError("scaling curve: no evaluation queries");

  std::vector<ScalingPoint> points;
  points.reserve(sizes.size());
  for (const std::size_t size : sizes) {
    const std::vector<ClickPair> prefix(pairs.begin(),
                                        pairs.begin() + static_cast<std::ptrdiff_t>(size));
    nn::ParameterSet<float> params =
        train_retriever(prefix, corpus, vocab, enc_cfg, train_cfg);
    const EmbeddingMatrix index = encode_corpus(enc_cfg, params, "denc.", vocab, corpus, 32);

    Run run;
    for (const auto& [qid, text] : eval_queries) {
      const std::vector<float> qvec =
          nn::encode_query_vec(enc_cfg, params, "qenc.", vocab, text);
      run.emplace(qid, mips_search(index, qvec, 10, qid));
    }
    points.push_back({size, ndcg_at_k(run, qrels, 10).mean});
    if (last_model != nullptr && size == sizes.back()) *last_model = std::move(params);
  }
  return points;
}

} // namespace cascade
