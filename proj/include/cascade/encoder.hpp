#pragma once

#include "cascade/encoder_config.hpp"
#include "cascade/graph.hpp"
#include "cascade/params.hpp"
#include "cascade/tokenizer.hpp"

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cascade::nn {

template <typename T>
Tensor<T> zeros_like_one(const Tensor<T>& t) {
  return Tensor<T>(t.dims);
}

template <typename T>
ParameterSet<T> zeros_like(const ParameterSet<T>& params) {
  ParameterSet<T> out;
  for (std::size_t i = 0; i < params.count(); ++i) {
    out.add(params.names()[i], Tensor<T>(params.tensor(i).dims));
  }
  return out;
}

// One encoder tower's parameters bound as leaves in a shared graph. `full`
// keeps the names as they appear in the owning ParameterSet (prefix intact)
// so gradients can be folded back by name.
template <typename T>
struct TowerBinding {
  std::unordered_map<std::string, Var> by_local_name;
  std::vector<std::pair<std::string, Var>> full;

  Var operator[](const std::string& local) const {
    auto it = by_local_name.find(local);
    if (it == by_local_name.end()) {
      throw UsageError("TowerBinding: parameter '" + local + "' was not bound");
    }
    return it->second;
  }
};

// Builds transformer forward passes on a Graph tape. One ModelGraph per
// forward/backward cycle; bind() registers parameter tensors as leaves.
template <typename T>
class ModelGraph {
public:
  explicit ModelGraph(const EncoderConfig& config) : config_(config) { config.validate(); }

  Graph<T>& g() { return graph_; }

  // Binds every parameter under `prefix` (e.g. "qenc." or "") as a leaf.
  TowerBinding<T> bind(const ParameterSet<T>& params, const std::string& prefix) {
    TowerBinding<T> tower;
    bool any = false;
    for (std::size_t i = 0; i < params.count(); ++i) {
      const std::string& name = params.names()[i];
      if (name.rfind(prefix, 0) != 0) continue;
      any = true;
      const Var v = graph_.leaf(params.tensor(i));
      tower.by_local_name.emplace(name.substr(prefix.size()), v);
      tower.full.emplace_back(name, v);
    }
    if (!any) throw UsageError("ModelGraph::bind: no parameters under prefix '" + prefix + "'");
    return tower;
  }

  // Forward pass over a padded batch; returns the [B,h] matrix of final-layer
  // CLS vectors. All sequences must share the same padded length.
  Var encode(const TowerBinding<T>& tower, const std::vector<TokenSequence>& batch) {
    if (batch.empty()) throw UsageError("encode: empty batch");
    BatchTokens tokens;
    tokens.batch = batch.size();
    tokens.time = batch[0].ids.size();
    tokens.ids.reserve(tokens.batch * tokens.time);
    tokens.lengths.reserve(tokens.batch);
    for (const TokenSequence& seq : batch) {
      if (seq.ids.size() != tokens.time) {
        throw UsageError("encode: ragged batch (padded lengths differ)");
      }
      if (seq.mask_len == 0 || seq.mask_len > tokens.time) {
        throw UsageError("encode: invalid mask length");
      }
      tokens.ids.insert(tokens.ids.end(), seq.ids.begin(), seq.ids.end());
      tokens.lengths.push_back(seq.mask_len);
    }

    const T eps = T(1e-5);
    Var x = graph_.embed(tower["tok_emb"], tower["pos_emb"], tokens);
    x = graph_.layer_norm(x, tower["emb_ln.gamma"], tower["emb_ln.beta"], eps);
    for (std::uint32_t i = 0; i < config_.layers; ++i) {
      const std::string p = "layer" + std::to_string(i) + ".";
      const Var q = graph_.linear(x, tower[p + "attn.wq"], tower[p + "attn.bq"]);
      const Var k = graph_.linear(x, tower[p + "attn.wk"], tower[p + "attn.bk"]);
      const Var v = graph_.linear(x, tower[p + "attn.wv"], tower[p + "attn.bv"]);
      const Var att = graph_.attention(q, k, v, tokens.lengths, config_.heads);
      const Var proj = graph_.linear(att, tower[p + "attn.wo"], tower[p + "attn.bo"]);
      x = graph_.layer_norm(graph_.add(x, proj), tower[p + "ln1.gamma"], tower[p + "ln1.beta"],
                            eps);
      const Var inner = graph_.gelu(graph_.linear(x, tower[p + "ffn.w1"], tower[p + "ffn.b1"]));
      const Var ffn = graph_.linear(inner, tower[p + "ffn.w2"], tower[p + "ffn.b2"]);
      x = graph_.layer_norm(graph_.add(x, ffn), tower[p + "ln2.gamma"], tower[p + "ln2.beta"],
                            eps);
    }
    const Var pooled = graph_.cls(x);
    if (!graph_.value(pooled).all_finite()) {
      throw NumericError("encode: non-finite activation in encoder output");
    }
    return pooled;
  }

  // Scalar relevance per row: cls_matrix[b,:] . head.w + head.b.
  Var head_scores(const TowerBinding<T>& tower, Var cls_matrix) {
    return graph_.rows_dot(cls_matrix, tower["head.w"], tower["head.b"]);
  }

  // Folds scale * d(loss)/d(param) into `accum` by full parameter name.
  // Names missing from `accum` are ignored so callers can accumulate into a
  // subset (accum must normally be zeros_like of the trained set).
  void add_grads_to(const TowerBinding<T>& tower, ParameterSet<T>& accum, T scale) {
    for (const auto& [name, var] : tower.full) {
      if (!accum.has(name)) continue;
      Tensor<T>& dst = accum.at(name);
      const Tensor<T>& src = graph_.grad(var);
      if (!dst.same_shape(src)) throw UsageError("add_grads_to: shape mismatch for " + name);
      for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += scale * src.data[i];
    }
  }

  const EncoderConfig& config() const { return config_; }

private:
  EncoderConfig config_;
  Graph<T> graph_;
};

// Single-input conveniences used by the tools and the index pipeline.
std::vector<float> encode_query_vec(const EncoderConfig& config, const ParameterSet<float>& params,
                                    const std::string& prefix, const Vocab& vocab,
                                    std::string_view text);
std::vector<float> encode_document_vec(const EncoderConfig& config,
                                       const ParameterSet<float>& params,
                                       const std::string& prefix, const Vocab& vocab,
                                       std::string_view title, std::string_view abstract);
float cross_score_value(const EncoderConfig& config, const ParameterSet<float>& params,
                        const Vocab& vocab, std::string_view query, std::string_view title,
                        std::string_view abstract);

// Batch document encoder: returns a [batch, h] row-major matrix.
Tensor<float> encode_sequences(const EncoderConfig& config, const ParameterSet<float>& params,
                               const std::string& prefix,
                               const std::vector<TokenSequence>& batch);

} // namespace cascade::nn
