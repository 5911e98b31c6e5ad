#include "cascade/params.hpp"

namespace cascade::nn {

namespace {

constexpr float kInitStd = 0.02f;

Tensor<float> normal_tensor(std::vector<std::size_t> dims, std::uint64_t seed) {
  Tensor<float> t(std::move(dims));
  Rng rng(seed);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data[i] = static_cast<float>(rng.normal(kInitStd));
  }
  return t;
}

Tensor<float> const_tensor(std::vector<std::size_t> dims, float value) {
  Tensor<float> t(std::move(dims));
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = value;
  return t;
}

} // namespace

ParameterSet<float> init_encoder_params(const EncoderConfig& config, bool with_head,
                                        const std::string& seed_salt) {
  config.validate();
  const std::size_t h = config.hidden;
  const std::size_t f = config.ffn;
  ParameterSet<float> params;

  auto stream = [&](const std::string& name) {
    return derive_seed(config.seed, seed_salt + "/" + name);
  };
  auto add_normal = [&](const std::string& name, std::vector<std::size_t> dims) {
    params.add(name, normal_tensor(std::move(dims), stream(name)));
  };
  auto add_const = [&](const std::string& name, std::vector<std::size_t> dims, float v) {
    params.add(name, const_tensor(std::move(dims), v));
  };

  add_normal("tok_emb", {config.vocab, h});
  add_normal("pos_emb", {config.max_positions(), h});
  add_const("emb_ln.gamma", {h}, 1.0f);
  add_const("emb_ln.beta", {h}, 0.0f);

  for (std::uint32_t i = 0; i < config.layers; ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) {
      add_normal(p + w, {h, h});
    }
    for (const char* b : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"}) {
      add_const(p + b, {h}, 0.0f);
    }
    add_const(p + "ln1.gamma", {h}, 1.0f);
    add_const(p + "ln1.beta", {h}, 0.0f);
    add_normal(p + "ffn.w1", {h, f});
    add_const(p + "ffn.b1", {f}, 0.0f);
    add_normal(p + "ffn.w2", {f, h});
    add_const(p + "ffn.b2", {h}, 0.0f);
    add_const(p + "ln2.gamma", {h}, 1.0f);
    add_const(p + "ln2.beta", {h}, 0.0f);
  }

  if (with_head) {
    add_normal("head.w", {h});
    add_const("head.b", {1}, 0.0f);
  }
  return params;
}

} // namespace cascade::nn
