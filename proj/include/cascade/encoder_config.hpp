#pragma once

#include "cascade/errors.hpp"

#include <cstdint>
#include <string>

namespace cascade::nn {

// Architecture of one transformer encoder. Every parameter shape is a pure
// function of these fields.
struct EncoderConfig {
  std::uint32_t hidden = 64;
  std::uint32_t layers = 2;
  std::uint32_t heads = 4;
  std::uint32_t ffn = 256;
  std::uint32_t vocab = 0;      // set after the vocabulary is built
  std::uint32_t max_query = 16; // query sequence length, CLS/SEP included
  std::uint32_t max_doc = 48;   // document and cross-encoder sequence length
  std::uint64_t seed = 1;

  // Positional table size: documents (and query+document pairs) are the
  // longest sequences the encoder ever sees.
  std::uint32_t max_positions() const { return max_query > max_doc ? max_query : max_doc; }

  void validate() const {
    if (hidden == 0 || layers == 0 || heads == 0 || ffn == 0 || vocab == 0) {
      throw UsageError("EncoderConfig: all dimensions must be >= 1");
    }
    if (hidden % heads != 0) {
      throw UsageError("EncoderConfig: heads (" + std::to_string(heads) +
                       ") must divide hidden size (" + std::to_string(hidden) + ")");
    }
    if (max_query < 3 || max_doc < 3) {
      throw UsageError("EncoderConfig: max lengths must be >= 3 for CLS/SEP");
    }
  }

  bool operator==(const EncoderConfig&) const = default;
};

} // namespace cascade::nn
