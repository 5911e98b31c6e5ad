#pragma once

#include "cascade/encoder_config.hpp"
#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/tensor.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace cascade::nn {

// A named, ordered collection of dense tensors. Iteration order is the
// insertion order, which callers rely on for deterministic reductions.
template <typename T>
class ParameterSet {
public:
  void add(const std::string& name, Tensor<T> tensor) {
    if (index_.count(name) != 0) throw UsageError("ParameterSet: duplicate tensor '" + name + "'");
    index_.emplace(name, names_.size());
    names_.push_back(name);
    tensors_.push_back(std::move(tensor));
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<T>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("ParameterSet: no tensor named '" + name + "'");
    return tensors_[it->second];
  }

  const Tensor<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("ParameterSet: no tensor named '" + name + "'");
    return tensors_[it->second];
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t count() const { return names_.size(); }
  Tensor<T>& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor<T>& tensor(std::size_t i) const { return tensors_[i]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const Tensor<T>& t : tensors_) n += t.size();
    return n;
  }

  bool all_finite() const {
    for (const Tensor<T>& t : tensors_) {
      if (!t.all_finite()) return false;
    }
    return true;
  }

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      out.add(names_[i], tensors_[i].template cast<U>());
    }
    return out;
  }

  // Merge another set under a name prefix (e.g. "qenc.").
  void adopt(const std::string& prefix, ParameterSet<T> other) {
    for (std::size_t i = 0; i < other.count(); ++i) {
      add(prefix + other.names()[i], std::move(other.tensor(i)));
    }
  }

  // Extract the subset under a prefix, with the prefix stripped.
  ParameterSet<T> extract(const std::string& prefix) const {
    ParameterSet<T> out;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].rfind(prefix, 0) == 0) {
        out.add(names_[i].substr(prefix.size()), tensors_[i]);
      }
    }
    return out;
  }

private:
  std::vector<std::string> names_;
  std::vector<Tensor<T>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Parameter names for one encoder tower, in a fixed order:
//   tok_emb [V,h], pos_emb [P,h], emb_ln.{gamma,beta} [h],
//   layer<i>.attn.{wq,wk,wv,wo} [h,h] + {bq,bk,bv,bo} [h],
//   layer<i>.ln1.{gamma,beta} [h], layer<i>.ffn.{w1 [h,f], b1 [f], w2 [f,h], b2 [h]},
//   layer<i>.ln2.{gamma,beta} [h],
// plus head.w [h] and head.b [1] when with_head is set (cross-encoder).
//
// Weights draw from N(0, 0.02^2) with a per-tensor stream derived from
// (config.seed, seed_salt, tensor name); biases and layer-norm offsets start
// at zero, layer-norm gains at one.
ParameterSet<float> init_encoder_params(const EncoderConfig& config, bool with_head,
                                        const std::string& seed_salt);

} // namespace cascade::nn
