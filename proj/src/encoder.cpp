#include "cascade/encoder.hpp"

namespace cascade::nn {

Tensor<float> encode_sequences(const EncoderConfig& config, const ParameterSet<float>& params,
                               const std::string& prefix,
                               const std::vector<TokenSequence>& batch) {
  ModelGraph<float> model(config);
  const TowerBinding<float> tower = model.bind(params, prefix);
  const Var cls = model.encode(tower, batch);
  return model.g().value(cls);
}

std::vector<float> encode_query_vec(const EncoderConfig& config, const ParameterSet<float>& params,
                                    const std::string& prefix, const Vocab& vocab,
                                    std::string_view text) {
  const TokenSequence seq = tokenize_query(vocab, text, config.max_query);
  return encode_sequences(config, params, prefix, {seq}).data;
}

std::vector<float> encode_document_vec(const EncoderConfig& config,
                                       const ParameterSet<float>& params,
                                       const std::string& prefix, const Vocab& vocab,
                                       std::string_view title, std::string_view abstract) {
  const TokenSequence seq = tokenize_document(vocab, title, abstract, config.max_doc);
  return encode_sequences(config, params, prefix, {seq}).data;
}

float cross_score_value(const EncoderConfig& config, const ParameterSet<float>& params,
                        const Vocab& vocab, std::string_view query, std::string_view title,
                        std::string_view abstract) {
  const TokenSequence seq =
      tokenize_pair(vocab, query, title, abstract, config.max_query, config.max_doc);
  ModelGraph<float> model(config);
  const TowerBinding<float> tower = model.bind(params, "");
  const Var cls = model.encode(tower, {seq});
  const Var scores = model.head_scores(tower, cls);
  const float s = model.g().value(scores).data[0];
  if (!std::isfinite(s)) throw NumericError("cross_score: non-finite score");
  return s;
}

} // namespace cascade::nn
