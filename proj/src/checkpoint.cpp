#include "cascade/checkpoint.hpp"

#include "cascade/binio.hpp"
#include "cascade/errors.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace cascade::nn {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

} // namespace

void save_checkpoint(const std::filesystem::path& path, const EncoderConfig& config,
                     const ParameterSet<float>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic, 4);
  binio::write_u32(out, kVersion);
  binio::write_u32(out, config.hidden);
  binio::write_u32(out, config.layers);
  binio::write_u32(out, config.heads);
  binio::write_u32(out, config.ffn);
  binio::write_u32(out, config.vocab);
  binio::write_u32(out, config.max_query);
  binio::write_u32(out, config.max_doc);
  binio::write_u64(out, config.seed);
  binio::write_u64(out, params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor<float>& t = params.tensor(i);
    binio::write_string(out, params.names()[i]);
    binio::write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.dims) binio::write_u64(out, d);
    binio::write_f32_array(out, t.ptr(), t.size());
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  const std::string ctx = path.string();
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(ctx + ": not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = binio::read_u32(in, ctx + " version");
  if (version != kVersion) {
    throw DataError(ctx + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config.hidden = binio::read_u32(in, ctx + " config");
  ckpt.config.layers = binio::read_u32(in, ctx + " config");
  ckpt.config.heads = binio::read_u32(in, ctx + " config");
  ckpt.config.ffn = binio::read_u32(in, ctx + " config");
  ckpt.config.vocab = binio::read_u32(in, ctx + " config");
  ckpt.config.max_query = binio::read_u32(in, ctx + " config");
  ckpt.config.max_doc = binio::read_u32(in, ctx + " config");
  ckpt.config.seed = binio::read_u64(in, ctx + " config");
  ckpt.config.validate();
  const std::uint64_t count = binio::read_u64(in, ctx + " tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = binio::read_string(in, ctx + " tensor name");
    const std::uint32_t rank = binio::read_u32(in, ctx + " tensor rank");
    if (rank == 0 || rank > 8) throw DataError(ctx + ": implausible tensor rank for " + name);
    std::vector<std::size_t> dims(rank);
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      dims[d] = static_cast<std::size_t>(binio::read_u64(in, ctx + " tensor dims"));
      if (dims[d] == 0 || total > (std::size_t(1) << 32) / std::max<std::size_t>(dims[d], 1)) {
        throw DataError(ctx + ": implausible tensor shape for " + name);
      }
      total *= dims[d];
    }
    Tensor<float> t(dims);
    binio::read_f32_array(in, t.ptr(), t.size(), ctx + " tensor " + name);
    if (!t.all_finite()) throw NumericError(ctx + ": non-finite values in tensor " + name);
    ckpt.params.add(name, std::move(t));
  }
  return ckpt;
}

} // namespace cascade::nn
