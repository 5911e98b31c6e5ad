#pragma once

#include "cascade/encoder_config.hpp"
#include "cascade/params.hpp"

#include <filesystem>

namespace cascade::nn {

// Versioned binary model container: magic "MCKP", u32 version, the encoder
// config, then each tensor as (name, rank, dims, f32 payload), little-endian.
struct Checkpoint {
  EncoderConfig config;
  ParameterSet<float> params;
};

void save_checkpoint(const std::filesystem::path& path, const EncoderConfig& config,
                     const ParameterSet<float>& params);

Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace cascade::nn
