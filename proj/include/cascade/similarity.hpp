#pragma once

#include "cascade/encoder.hpp"
#include "cascade/vocab.hpp"

#include <string>
#include <string_view>

namespace cascade {

// Scores a sentence pair by embedding both sides with the same query tower.
// Default is the raw inner product, matching the retrieval score; `cosine`
// switches to the length-normalized variant.
double sentence_similarity(const nn::EncoderConfig& config, const nn::ParameterSet<float>& params,
                           const std::string& prefix, const Vocab& vocab, std::string_view s1,
                           std::string_view s2, bool cosine = false);

} // namespace cascade
