#include "cascade/metrics.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

namespace {

void check_metric_args(const Qrels& qrels, std::size_t k) {
  if (k < 1) throw UsageError("ranking metric: k must be >= 1");
  if (qrels.empty()) throw DataError("ranking metric: empty relevance judgments");
  for (const auto& [qid, grades] : qrels) {
    for (const auto& [doc_id, grade] : grades) {
      if (grade < 0) {
        throw DataError("ranking metric: negative grade for query " + qid + ", doc " + doc_id);
      }
    }
  }
}

const std::vector<ScoredDoc>* run_entries(const Run& run, const std::string& qid) {
  const auto it = run.find(qid);
  return it == run.end() ? nullptr : &it->second.entries;
}

int grade_of(const std::map<std::string, int>& grades, const std::string& doc_id) {
  const auto it = grades.find(doc_id);
  return it == grades.end() ? 0 : it->second;
}

MetricReport finish(MetricReport report) {
  if (report.per_query.empty()) {
    throw DataError("ranking metric: no query has a positive relevance grade");
  }
  double sum = 0.0;
  for (const auto& [qid, value] : report.per_query) sum += value;
  report.mean = sum / static_cast<double>(report.per_query.size());
  return report;
}

} // namespace

MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  check_metric_args(qrels, k);
  MetricReport report;
  for (const auto& [qid, grades] : qrels) {
    std::vector<int> ideal;
    ideal.reserve(grades.size());
    for (const auto& [doc_id, grade] : grades) ideal.push_back(grade);
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) {
      idcg += (std::exp2(ideal[r]) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
    }
    if (idcg == 0.0) continue; // nothing relevant: query is not evaluable

    double dcg = 0.0;
    if (const auto* entries = run_entries(run, qid)) {
      for (std::size_t r = 0; r < std::min(k, entries->size()); ++r) {
        const int g = grade_of(grades, (*entries)[r].doc_id);
        dcg += (std::exp2(g) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
      }
    }
    report.per_query.emplace(qid, dcg / idcg);
  }
  return finish(std::move(report));
}

MetricReport map_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  check_metric_args(qrels, k);
  MetricReport report;
  for (const auto& [qid, grades] : qrels) {
    std::size_t total_relevant = 0;
    for (const auto& [doc_id, grade] : grades) {
      if (grade > 0) ++total_relevant;
    }
    if (total_relevant == 0) continue;

    double sum_precision = 0.0;
    if (const auto* entries = run_entries(run, qid)) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < std::min(k, entries->size()); ++r) {
        if (grade_of(grades, (*entries)[r].doc_id) > 0) {
          ++hits;
          sum_precision += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
      }
    }
    report.per_query.emplace(qid, sum_precision / static_cast<double>(std::min(k, total_relevant)));
  }
  return finish(std::move(report));
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw UsageError("pearson: length mismatch");
  if (x.size() < 2) throw UsageError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  if (vx == 0.0 || vy == 0.0) {
    throw NumericError("pearson: correlation undefined for zero-variance input");
  }
  return cov / std::sqrt(vx * vy);
}

} // namespace cascade
