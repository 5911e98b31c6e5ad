#pragma once

#include "cascade/graph.hpp"

#include <vector>

namespace cascade::nn {

// Bidirectional in-batch contrastive loss over the B x B score matrix
// S = Q D^T. Row i's positive sits on the diagonal; the rest of the row
// (column) are the in-batch negatives. Per-row losses are combined with the
// click-derived weights, then the two directions mix as
//   L = alpha * L_q2d + (1 - alpha) * L_d2q.
template <typename T>
Var retriever_batch_loss(Graph<T>& g, Var q_embs, Var d_embs, const std::vector<T>& weights,
                         T alpha) {
  const Tensor<T>& qv = g.value(q_embs);
  const Tensor<T>& dv = g.value(d_embs);
  if (qv.rank() != 2 || dv.rank() != 2 || qv.dim(0) != dv.dim(0) || qv.dim(1) != dv.dim(1)) {
    throw UsageError("retriever_batch_loss: embedding matrices must both be [B,h]");
  }
  const std::size_t B = qv.dim(0);
  if (B < 2) throw UsageError("retriever_batch_loss: batch of " + std::to_string(B) +
                              " has no in-batch negatives");
  if (weights.size() != B) throw UsageError("retriever_batch_loss: weight count != batch");
  if (alpha < T(0) || alpha > T(1)) throw UsageError("retriever_batch_loss: alpha outside [0,1]");

  std::vector<T> neg_w(weights);
  for (T& w : neg_w) w = -w;

  const Var scores = g.matmul_nt(q_embs, d_embs);
  const Var q2d = g.weighted_sum(g.diag(g.log_softmax_rows(scores)), neg_w);
  const Var d2q = g.weighted_sum(g.diag(g.log_softmax_rows(g.transpose(scores))), neg_w);
  return g.combine({q2d, d2q}, {alpha, T(1) - alpha});
}

// Negative log-likelihood of the positive against its mined negatives.
// scores[0] is the positive; scores[1..] are the negatives.
template <typename T>
Var reranker_loss(Graph<T>& g, Var scores) {
  const Tensor<T>& sv = g.value(scores);
  if (sv.rank() != 1 || sv.size() < 2) {
    throw UsageError("reranker_loss: need a positive score and at least one negative");
  }
  const Var row = g.reshape(scores, {1, sv.size()});
  return g.neg(g.pick(g.log_softmax_rows(row), 0));
}

// Plain-arithmetic references for the graph losses (used by tests and by
// held-out loss evaluation paths that never need gradients).
double retriever_batch_loss_value(const Tensor<double>& score_matrix,
                                  const std::vector<double>& weights, double alpha);
double reranker_loss_value(double pos_score, const std::vector<double>& neg_scores);

} // namespace cascade::nn
