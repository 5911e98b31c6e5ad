#include "cascade/trainer.hpp"

#include "cascade/errors.hpp"
#include "cascade/losses.hpp"
#include "cascade/optimizer.hpp"
#include "cascade/rng.hpp"
#include "cascade/tokenizer.hpp"

#include <cmath>
#include <numeric>

namespace cascade {

using nn::ModelGraph;
using nn::ParameterSet;
using nn::TowerBinding;
using nn::Var;

namespace {

// Seeded epoch shuffler; every epoch draws a fresh permutation from a seed
// derived from (base seed, epoch index). Tail batches smaller than the
// requested size roll over into the next epoch.
class EpochSampler {
public:
  EpochSampler(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) { refill(); }

  std::vector<std::size_t> batch(std::size_t b) {
    if (b > n_) throw UsageError("EpochSampler: batch larger than data set");
    if (order_.size() - pos_ < b) refill();
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(pos_ + b));
    pos_ += b;
    return out;
  }

private:
  void refill() {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(derive_seed(seed_, "epoch-" + std::to_string(epoch_++)));
    rng.shuffle(order_);
    pos_ = 0;
  }

  std::size_t n_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

std::vector<float> to_float(const std::vector<double>& w) {
  return std::vector<float>(w.begin(), w.end());
}

void check_loss_finite(float loss, const char* where) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(where) + ": non-finite loss, training diverged");
  }
}

struct TokenizedPairs {
  std::vector<TokenSequence> queries;
  std::vector<TokenSequence> docs;
  std::vector<std::uint64_t> clicks;
};

TokenizedPairs tokenize_pairs(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                              const Vocab& vocab, const nn::EncoderConfig& enc_cfg) {
  TokenizedPairs out;
  out.queries.reserve(pairs.size());
  out.docs.reserve(pairs.size());
  out.clicks.reserve(pairs.size());
  for (const ClickPair& p : pairs) {
    const Article& a = corpus.by_id(p.doc_id); // throws DataError if unresolvable
    out.queries.push_back(tokenize_query(vocab, p.query, enc_cfg.max_query));
    out.docs.push_back(tokenize_document(vocab, a.title, a.abstract_text, enc_cfg.max_doc));
    out.clicks.push_back(p.clicks);
  }
  return out;
}

// One forward pass of the in-batch loss; fills `grads` when given.
float retriever_batch_pass(const TokenizedPairs& data, const std::vector<std::size_t>& picks,
                           const nn::EncoderConfig& enc_cfg, const ParameterSet<float>& params,
                           float alpha, ParameterSet<float>* grads, float grad_scale) {
  std::vector<TokenSequence> queries, docs;
  std::vector<std::uint64_t> clicks;
  queries.reserve(picks.size());
  docs.reserve(picks.size());
  clicks.reserve(picks.size());
  for (const std::size_t i : picks) {
    queries.push_back(data.queries[i]);
    docs.push_back(data.docs[i]);
    clicks.push_back(data.clicks[i]);
  }
  const std::vector<float> weights = to_float(click_weights(clicks));

  ModelGraph<float> model(enc_cfg);
  const TowerBinding<float> qt = model.bind(params, "qenc.");
  const TowerBinding<float> dt = model.bind(params, "denc.");
  const Var q = model.encode(qt, queries);
  const Var d = model.encode(dt, docs);
  const Var loss = nn::retriever_batch_loss(model.g(), q, d, weights, alpha);
  const float value = model.g().scalar_value(loss);
  if (grads != nullptr) {
    model.g().backward(loss);
    model.add_grads_to(qt, *grads, grad_scale);
    model.add_grads_to(dt, *grads, grad_scale);
  }
  return value;
}

struct TokenizedInstance {
  std::vector<TokenSequence> rows; // positive first, then negatives
  std::uint64_t clicks = 1;
};

std::vector<TokenizedInstance> tokenize_instances(const std::vector<RerankInstance>& instances,
                                                  const Corpus& corpus, const Vocab& vocab,
                                                  const nn::EncoderConfig& enc_cfg) {
  std::vector<TokenizedInstance> out;
  out.reserve(instances.size());
  for (const RerankInstance& inst : instances) {
    if (inst.negs.empty()) {
      throw DataError("reranker instance for query '" + inst.qid + "' has no negatives");
    }
    TokenizedInstance ti;
    ti.clicks = inst.clicks;
    ti.rows.reserve(inst.negs.size() + 1);
    const Article& pos = corpus.by_id(inst.pos);
    ti.rows.push_back(tokenize_pair(vocab, inst.query, pos.title, pos.abstract_text,
                                    enc_cfg.max_query, enc_cfg.max_doc));
    for (const std::string& neg_id : inst.negs) {
      const Article& neg = corpus.by_id(neg_id);
      ti.rows.push_back(tokenize_pair(vocab, inst.query, neg.title, neg.abstract_text,
                                      enc_cfg.max_query, enc_cfg.max_doc));
    }
    out.push_back(std::move(ti));
  }
  return out;
}

// Per-instance NLL; adds weight * d(loss)/d(params) into grads when given.
float reranker_instance_pass(const TokenizedInstance& inst, const nn::EncoderConfig& enc_cfg,
                             const ParameterSet<float>& params, ParameterSet<float>* grads,
                             float weight) {
  ModelGraph<float> model(enc_cfg);
  const TowerBinding<float> tower = model.bind(params, "");
  const Var cls = model.encode(tower, inst.rows);
  const Var scores = model.head_scores(tower, cls);
  const Var loss = nn::reranker_loss(model.g(), scores);
  const float value = model.g().scalar_value(loss);
  if (grads != nullptr) {
    model.g().backward(loss);
    model.add_grads_to(tower, *grads, weight);
  }
  return value;
}

} // namespace

ParameterSet<float> init_retriever_params(const nn::EncoderConfig& enc_cfg) {
  ParameterSet<float> params;
  params.adopt("qenc.", nn::init_encoder_params(enc_cfg, false, "qenc"));
  params.adopt("denc.", nn::init_encoder_params(enc_cfg, false, "denc"));
  return params;
}

ParameterSet<float> init_reranker_params(const nn::EncoderConfig& enc_cfg) {
  return nn::init_encoder_params(enc_cfg, true, "cross");
}

ParameterSet<float> train_retriever(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                                    const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                                    const RetrieverTrainConfig& cfg, const TrainHooks* hooks) {
  cfg.validate();
  enc_cfg.validate();
  if (pairs.size() < cfg.batch) {
    throw DataError("train_retriever: " + std::to_string(pairs.size()) +
                    " pairs cannot fill a batch of " + std::to_string(cfg.batch));
  }
  const TokenizedPairs data = tokenize_pairs(pairs, corpus, vocab, enc_cfg);
  ParameterSet<float> params = init_retriever_params(enc_cfg);

  nn::AdamConfig adam;
  adam.lr = cfg.lr;
  adam.warmup_steps = cfg.warmup_steps;
  adam.total_steps = cfg.total_steps;
  nn::Adam opt(params, adam);

  EpochSampler sampler(pairs.size(), derive_seed(cfg.seed, "retriever-batches"));
  const float scale = 1.0f / static_cast<float>(cfg.accum_steps);
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    ParameterSet<float> grads = nn::zeros_like(params);
    float loss = 0.0f;
    for (std::size_t a = 0; a < cfg.accum_steps; ++a) {
      loss += scale * retriever_batch_pass(data, sampler.batch(cfg.batch), enc_cfg, params,
                                           cfg.alpha, &grads, scale);
    }
    check_loss_finite(loss, "train_retriever");
    opt.step(params, grads);
    if (hooks != nullptr && hooks->on_step) hooks->on_step(step, opt.effective_lr(step), loss);
    if (hooks != nullptr && hooks->on_checkpoint && cfg.checkpoint_every > 0 &&
        step % cfg.checkpoint_every == 0) {
      hooks->on_checkpoint(step, params);
    }
  }
  return params;
}

float retriever_eval_loss(const std::vector<ClickPair>& pairs, const Corpus& corpus,
                          const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                          const nn::ParameterSet<float>& params, std::size_t batch, float alpha) {
  if (batch < 2) throw UsageError("retriever_eval_loss: batch must be >= 2");
  if (pairs.size() < batch) throw DataError("retriever_eval_loss: not enough pairs for a batch");
  const TokenizedPairs data = tokenize_pairs(pairs, corpus, vocab, enc_cfg);
  float total = 0.0f;
  std::size_t batches = 0;
  for (std::size_t start = 0; start + batch <= pairs.size(); start += batch) {
    std::vector<std::size_t> picks(batch);
    std::iota(picks.begin(), picks.end(), start);
    total += retriever_batch_pass(data, picks, enc_cfg, params, alpha, nullptr, 0.0f);
    ++batches;
  }
  return total / static_cast<float>(batches);
}

ParameterSet<float> train_reranker(const std::vector<RerankInstance>& instances,
                                   const Corpus& corpus, const Vocab& vocab,
                                   const nn::EncoderConfig& enc_cfg,
                                   const RerankTrainConfig& cfg, const TrainHooks* hooks) {
  cfg.validate();
  enc_cfg.validate();
  if (instances.size() < cfg.batch) {
    throw DataError("train_reranker: " + std::to_string(instances.size()) +
                    " instances cannot fill a batch of " + std::to_string(cfg.batch));
  }
  const std::vector<TokenizedInstance> data =
      tokenize_instances(instances, corpus, vocab, enc_cfg);
  ParameterSet<float> params = init_reranker_params(enc_cfg);

  nn::AdamConfig adam;
  adam.lr = cfg.lr;
  adam.warmup_steps = cfg.warmup_steps;
  adam.total_steps = cfg.total_steps;
  nn::Adam opt(params, adam);

  EpochSampler sampler(instances.size(), derive_seed(cfg.seed, "reranker-batches"));
  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    const std::vector<std::size_t> picks = sampler.batch(cfg.batch);
    std::vector<std::uint64_t> clicks;
    clicks.reserve(picks.size());
    for (const std::size_t i : picks) clicks.push_back(data[i].clicks);
    const std::vector<float> weights = to_float(click_weights(clicks));

    ParameterSet<float> grads = nn::zeros_like(params);
    float loss = 0.0f;
    for (std::size_t b = 0; b < picks.size(); ++b) {
      loss += weights[b] *
              reranker_instance_pass(data[picks[b]], enc_cfg, params, &grads, weights[b]);
    }
    check_loss_finite(loss, "train_reranker");
    opt.step(params, grads);
    if (hooks != nullptr && hooks->on_step) hooks->on_step(step, opt.effective_lr(step), loss);
    if (hooks != nullptr && hooks->on_checkpoint && cfg.checkpoint_every > 0 &&
        step % cfg.checkpoint_every == 0) {
      hooks->on_checkpoint(step, params);
    }
  }
  return params;
}

float reranker_eval_loss(const std::vector<RerankInstance>& instances, const Corpus& corpus,
                         const Vocab& vocab, const nn::EncoderConfig& enc_cfg,
                         const nn::ParameterSet<float>& params) {
  if (instances.empty()) throw DataError("reranker_eval_loss: no instances");
  const std::vector<TokenizedInstance> data =
      tokenize_instances(instances, corpus, vocab, enc_cfg);
  float total = 0.0f;
  for (const TokenizedInstance& inst : data) {
    total += reranker_instance_pass(inst, enc_cfg, params, nullptr, 0.0f);
  }
  return total / static_cast<float>(data.size());
}

} // namespace cascade
