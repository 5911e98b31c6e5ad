#include "cascade/similarity.hpp"

#include "cascade/errors.hpp"
#include "cascade/mips.hpp"

#include <cmath>

namespace cascade {

double sentence_similarity(const nn::EncoderConfig& config, const nn::ParameterSet<float>& params,
                           const std::string& prefix, const Vocab& vocab, std::string_view s1,
                           std::string_view s2, bool cosine) {
  const std::vector<float> a = nn::encode_query_vec(config, params, prefix, vocab, s1);
  const std::vector<float> b = nn::encode_query_vec(config, params, prefix, vocab, s2);
  const double inner = dot_f32(a.data(), b.data(), a.size());
  if (!cosine) return inner;
  const double na = std::sqrt(dot_f32(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(dot_f32(b.data(), b.data(), b.size()));
  if (na == 0.0 || nb == 0.0) {
    throw NumericError("sentence_similarity: zero-norm embedding in cosine mode");
  }
  return inner / (na * nb);
}

} // namespace cascade
