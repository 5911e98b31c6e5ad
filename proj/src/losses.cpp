#include "cascade/losses.hpp"

#include <algorithm>
#include <cmath>

namespace cascade::nn {

namespace {

// log(sum_j exp(x_j)) with max subtraction.
double log_sum_exp(const double* x, std::size_t n) {
  double maxv = x[0];
  for (std::size_t j = 1; j < n; ++j) maxv = std::max(maxv, x[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::exp(x[j] - maxv);
  return maxv + std::log(sum);
}

} // namespace

double retriever_batch_loss_value(const Tensor<double>& s, const std::vector<double>& weights,
                                  double alpha) {
  if (s.rank() != 2 || s.dim(0) != s.dim(1)) {
    throw UsageError("retriever_batch_loss_value: score matrix must be square");
  }
  const std::size_t B = s.dim(0);
  if (B < 2) throw UsageError("retriever_batch_loss_value: batch too small");
  if (weights.size() != B) throw UsageError("retriever_batch_loss_value: weight count != batch");
  double q2d = 0.0, d2q = 0.0;
  std::vector<double> col(B);
  for (std::size_t i = 0; i < B; ++i) {
    q2d += weights[i] * (log_sum_exp(s.ptr() + i * B, B) - s.at(i, i));
    for (std::size_t j = 0; j < B; ++j) col[j] = s.at(j, i);
    d2q += weights[i] * (log_sum_exp(col.data(), B) - s.at(i, i));
  }
  return alpha * q2d + (1.0 - alpha) * d2q;
}

double reranker_loss_value(double pos_score, const std::vector<double>& neg_scores) {
  if (neg_scores.empty()) throw UsageError("reranker_loss_value: empty negative list");
  std::vector<double> all;
  all.reserve(neg_scores.size() + 1);
  all.push_back(pos_score);
  all.insert(all.end(), neg_scores.begin(), neg_scores.end());
  return log_sum_exp(all.data(), all.size()) - pos_score;
}

} // namespace cascade::nn
