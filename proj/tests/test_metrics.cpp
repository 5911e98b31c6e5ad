#include "cascade/metrics.hpp"

#include "cascade/bm25.hpp"
#include "cascade/errors.hpp"
#include "cascade/rng.hpp"
#include "cascade/similarity.hpp"
#include "cascade/trainer.hpp"
#include "cascade/trec.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace cascade;

namespace {

RankedList make_list(const std::string& qid, const std::vector<std::string>& ids) {
  RankedList list;
  list.qid = qid;
  double score = static_cast<double>(ids.size());
  for (const auto& id : ids) list.entries.push_back({id, score--});
  return list;
}

// Naive references written against the formulas directly, no shared code
// with the production implementations beyond the container types.
double naive_ndcg(const std::vector<std::string>& ranked, const std::map<std::string, int>& grades,
                  std::size_t k) {
  auto dcg_of = [&](const std::vector<int>& gains) {
    double total = 0.0;
    for (std::size_t i = 0; i < std::min(k, gains.size()); ++i) {
      total += (std::pow(2.0, gains[i]) - 1.0) / (std::log(i + 2.0) / std::log(2.0));
    }
    return total;
  };
  std::vector<int> got;
  for (const auto& id : ranked) {
    const auto it = grades.find(id);
    got.push_back(it == grades.end() ? 0 : it->second);
  }
  std::vector<int> best;
  for (const auto& [id, g] : grades) best.push_back(g);
  std::sort(best.rbegin(), best.rend());
  const double idcg = dcg_of(best);
  return idcg == 0.0 ? -1.0 : dcg_of(got) / idcg;
}

double naive_map(const std::vector<std::string>& ranked, const std::map<std::string, int>& grades,
                 std::size_t k) {
  std::size_t relevant = 0;
  for (const auto& [id, g] : grades) {
    if (g > 0) ++relevant;
  }
  if (relevant == 0) return -1.0;
  double ap = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    const auto it = grades.find(ranked[i]);
    if (it != grades.end() && it->second > 0) {
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return ap / static_cast<double>(std::min(k, relevant));
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("ndcg closed-form cases") {
  Qrels qrels{{"q1", {{"d1", 1}}}};
  Run perfect{{"q1", make_list("q1", {"d1", "d2"})}};
  CHECK(ndcg_at_k(perfect, qrels, 2).mean == doctest::Approx(1.0).epsilon(1e-12));

  Run swapped{{"q1", make_list("q1", {"d2", "d1"})}};
  const double expected = 1.0 / std::log2(3.0);
  const MetricReport rep = ndcg_at_k(swapped, qrels, 2);
  CHECK(rep.mean == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.mean == doctest::Approx(0.63093).epsilon(1e-4));
  CHECK(rep.per_query.at("q1") == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("map closed-form cases") {
  Qrels qrels{{"q1", {{"d1", 2}}}};
  Run first{{"q1", make_list("q1", {"d1", "d2"})}};
  CHECK(map_at_k(first, qrels, 10).mean == doctest::Approx(1.0).epsilon(1e-12));

  Run second{{"q1", make_list("q1", {"d2", "d1", "d3"})}};
  CHECK(map_at_k(second, qrels, 10).mean == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ranking metrics equal naive references on random instances") {
  Rng rng(derive_seed(101, "metric-fuzz"));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n_docs = 3 + rng.uniform_index(12);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_docs; ++i) ids.push_back("d" + std::to_string(i));

    std::map<std::string, int> grades;
    bool any_positive = false;
    for (const auto& id : ids) {
      if (rng.uniform_real() < 0.6) {
        const int g = static_cast<int>(rng.uniform_index(4));
        grades[id] = g;
        any_positive = any_positive || g > 0;
      }
    }
    if (!any_positive) grades[ids[0]] = 1;

    std::vector<std::string> ranked = ids;
    rng.shuffle(ranked);
    const std::size_t drop = rng.uniform_index(2);
    ranked.resize(ranked.size() - drop);
    const std::size_t k = 1 + rng.uniform_index(n_docs + 2);

    Qrels qrels{{"q", grades}};
    Run run{{"q", make_list("q", ranked)}};
    const double nd = ndcg_at_k(run, qrels, k).mean;
    const double mp = map_at_k(run, qrels, k).mean;
    CHECK(nd == doctest::Approx(naive_ndcg(ranked, grades, k)).epsilon(1e-12));
    CHECK(mp == doctest::Approx(naive_map(ranked, grades, k)).epsilon(1e-12));
    CHECK(nd >= 0.0);
    CHECK(nd <= 1.0 + 1e-12);
    CHECK(mp >= 0.0);
    CHECK(mp <= 1.0 + 1e-12);
  }
}

TEST_CASE("promoting a relevant document never hurts either metric") {
  Rng rng(derive_seed(55, "promote"));
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < 8; ++i) ids.push_back("d" + std::to_string(i));
    std::map<std::string, int> grades{{"d3", 2}, {"d5", 1}};
    std::vector<std::string> ranked = ids;
    rng.shuffle(ranked);

    const auto rel_pos = static_cast<std::size_t>(
        std::find(ranked.begin(), ranked.end(), "d3") - ranked.begin());
    if (rel_pos == 0) continue;
    std::vector<std::string> promoted = ranked;
    std::swap(promoted[rel_pos], promoted[rel_pos - 1]);

    Qrels qrels{{"q", grades}};
    Run before{{"q", make_list("q", ranked)}};
    Run after{{"q", make_list("q", promoted)}};
    for (const std::size_t k : {3u, 5u, 8u}) {
      CHECK(ndcg_at_k(after, qrels, k).mean >= ndcg_at_k(before, qrels, k).mean - 1e-12);
      CHECK(map_at_k(after, qrels, k).mean >= map_at_k(before, qrels, k).mean - 1e-12);
    }
  }
}

TEST_CASE("queries without positive judgments are excluded from the mean") {
  Qrels qrels{{"q1", {{"d1", 1}}}, {"q2", {{"d1", 0}}}};
  Run run{{"q1", make_list("q1", {"d1"})}, {"q2", make_list("q2", {"d1"})}};
  const MetricReport rep = ndcg_at_k(run, qrels, 5);
  CHECK(rep.per_query.size() == 1);
  CHECK(rep.per_query.count("q2") == 0);
  CHECK(rep.mean == doctest::Approx(1.0));

  // A judged query missing from the run scores zero but stays in the mean.
  Run partial{{"q1", make_list("q1", {"d1"})}};
  Qrels two{{"q1", {{"d1", 1}}}, {"q3", {{"d9", 2}}}};
  const MetricReport rep2 = ndcg_at_k(partial, two, 5);
  CHECK(rep2.per_query.at("q3") == 0.0);
  CHECK(rep2.mean == doctest::Approx(0.5));

  CHECK_THROWS_AS(ndcg_at_k(run, Qrels{}, 5), DataError);
  CHECK_THROWS_AS(map_at_k(run, Qrels{}, 5), DataError);
  Qrels all_zero{{"q1", {{"d1", 0}}}};
  CHECK_THROWS_AS(ndcg_at_k(run, all_zero, 5), DataError);
  CHECK_THROWS_AS(ndcg_at_k(run, qrels, 0), UsageError);
  Qrels negative{{"q1", {{"d1", -1}}}};
  CHECK_THROWS_AS(ndcg_at_k(run, negative, 5), DataError);
}

TEST_CASE("ndcg ignores ordering below the cutoff") {
  Qrels qrels{{"q", {{"d0", 2}, {"d1", 1}}}};
  Run a{{"q", make_list("q", {"d0", "d1", "d2", "d3", "d4"})}};
  Run b{{"q", make_list("q", {"d0", "d1", "d4", "d3", "d2"})}};
  CHECK(ndcg_at_k(a, qrels, 2).mean == ndcg_at_k(b, qrels, 2).mean);
}

TEST_CASE("pearson correlation basics") {
  const std::vector<double> x{1.0, 2.5, 3.0, 7.0, -2.0};
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> neg = x;
  for (auto& v : neg) v = -v;
  CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));

  std::vector<double> affine = x;
  for (auto& v : affine) v = 3.0 * v + 11.0;
  CHECK(pearson(x, affine) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(pearson(x, {1.0, 1.0, 1.0, 1.0, 1.0}), NumericError);
  CHECK_THROWS_AS(pearson(x, {1.0, 2.0}), UsageError);
  CHECK_THROWS_AS(pearson({1.0}, {2.0}), UsageError);

  // Known small case: r of (1,2,3) vs (1,2,4) = 0.98198...
  CHECK(pearson({1, 2, 3}, {1, 2, 4}) ==
        doctest::Approx(0.981980506061966).epsilon(1e-12));
}

namespace {

Corpus small_corpus() {
  Corpus corpus;
  Article a;
  a.id = "b1";
  a.title = "heart disease treatment";
  a.abstract_text = "treatment of chronic heart disease with statins";
  corpus.add(a);
  Article b;
  b.id = "b2";
  b.title = "influenza vaccine efficacy";
  b.abstract_text = "seasonal influenza vaccine trial";
  corpus.add(b);
  Article c;
  c.id = "b3";
  c.title = "statins and liver function";
  c.abstract_text = "liver enzymes under statin therapy";
  corpus.add(c);
  return corpus;
}

} // namespace

TEST_CASE("bm25 single-document score matches hand evaluation") {
  Corpus corpus;
  Article a;
  a.id = "only";
  a.title = "aspirin study";
  a.abstract_text = "aspirin reduces risk";
  corpus.add(a);
  const Bm25Index index(corpus);

  // N=1, df=1, tf("aspirin")=2, len=5, avglen=5.
  const double idf = std::log(1.0 + (1.0 - 1.0 + 0.5) / (1.0 + 0.5));
  const double tf_term = 2.0 * (1.2 + 1.0) / (2.0 + 1.2 * (1.0 - 0.75 + 0.75 * 1.0));
  CHECK(index.score("aspirin", 0) == doctest::Approx(idf * tf_term).epsilon(1e-12));

  // One occurrence: tf=1.
  const double tf1 = 1.0 * (1.2 + 1.0) / (1.0 + 1.2);
  CHECK(index.score("risk", 0) == doctest::Approx(idf * tf1).epsilon(1e-12));

  // Sum over query terms.
  CHECK(index.score("aspirin risk", 0) ==
        doctest::Approx(idf * tf_term + idf * tf1).epsilon(1e-12));
}

TEST_CASE("bm25 absent terms score zero and ranking falls back to id order") {
  const Corpus corpus = small_corpus();
  const Bm25Index index(corpus);
  const RankedList list = index.rank("q", "zebra quantum", 10);
  REQUIRE(list.entries.size() == 3);
  CHECK(list.entries[0].doc_id == "b1");
  CHECK(list.entries[1].doc_id == "b2");
  CHECK(list.entries[2].doc_id == "b3");
  for (const auto& e : list.entries) CHECK(e.score == 0.0);

  // Duplicating non-occurring terms changes nothing.
  CHECK(index.score("statins zebra", 0) == index.score("statins zebra zebra zebra", 0));
}

TEST_CASE("bm25 ranks the lexically matching documents first") {
  const Corpus corpus = small_corpus();
  const Bm25Index index(corpus);
  const RankedList heart = index.rank("q", "heart disease", 3);
  CHECK(heart.entries[0].doc_id == "b1");
  CHECK(heart.entries[0].score > heart.entries[1].score);
  const RankedList flu = index.rank("q", "influenza vaccine", 1);
  REQUIRE(flu.entries.size() == 1);
  CHECK(flu.entries[0].doc_id == "b2");

  CHECK_THROWS_AS(Bm25Index(Corpus{}), DataError);
  CHECK_THROWS_AS(index.rank("q", "x", 0), UsageError);
  Bm25Config bad;
  bad.b = 1.5;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("bm25 term-frequency saturation: non-decreasing, concave in tf") {
  // Identical doc lengths, tf varies 1..8; filler terms are all distinct.
  Corpus corpus;
  for (int tf = 1; tf <= 8; ++tf) {
    Article a;
    a.id = "s" + std::to_string(tf);
    std::string text;
    for (int i = 0; i < tf; ++i) text += "signal ";
    for (int i = tf; i < 8; ++i) {
      text += "filler" + std::to_string(tf) + "x" + std::to_string(i) + " ";
    }
    a.title = "t";
    a.abstract_text = text;
    corpus.add(a);
  }
  const Bm25Index index(corpus);
  std::vector<double> scores;
  for (std::size_t i = 0; i < 8; ++i) scores.push_back(index.score("signal", i));
  for (std::size_t i = 1; i < 8; ++i) CHECK(scores[i] >= scores[i - 1]);
  for (std::size_t i = 2; i < 8; ++i) {
    const double d1 = scores[i - 1] - scores[i - 2];
    const double d2 = scores[i] - scores[i - 1];
    CHECK(d2 <= d1 + 1e-12);
  }
}

TEST_CASE("qrels files round-trip and reject malformed lines") {
  const Qrels qrels{{"q1", {{"d1", 2}, {"d2", 0}}}, {"q2", {{"d7", 1}}}};
  const auto path = temp_path("cascade_qrels_test.txt");
  save_qrels(path, qrels);
  CHECK(load_qrels(path) == qrels);

  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("q1 0 d1 x\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_qrels(path), doctest::Contains(":1"), DataError);

  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("q1 0 d1 1\nq1 0 d1 2\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_qrels(path), DataError);

  // Empty file: legal, but evaluation with it then fails.
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fclose(f);
  }
  const Qrels empty = load_qrels(path);
  CHECK(empty.empty());
  CHECK_THROWS_AS(ndcg_at_k(Run{}, empty, 10), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("run files round-trip exactly, including awkward doubles") {
  Rng rng(derive_seed(71, "runs"));
  Run run;
  for (int q = 0; q < 5; ++q) {
    const std::string qid = "q" + std::to_string(q);
    RankedList list;
    list.qid = qid;
    std::vector<ScoredDoc> entries;
    for (int d = 0; d < 20; ++d) {
      const double mag = std::pow(10.0, static_cast<double>(rng.uniform_index(17)) - 8.0);
      const double score = (2.0 * rng.uniform_real() - 1.0) * mag;
      entries.push_back({"d" + std::to_string(d), score});
    }
    std::sort(entries.begin(), entries.end(), ranked_before);
    list.entries = entries;
    run[qid] = list;
  }
  const auto path = temp_path("cascade_run_test.txt");
  write_run(path, run, "cascade-test");
  const Run back = load_run(path);
  REQUIRE(back.size() == run.size());
  for (const auto& [qid, list] : run) {
    const RankedList& got = back.at(qid);
    REQUIRE(got.entries.size() == list.entries.size());
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
      CHECK(got.entries[i].doc_id == list.entries[i].doc_id);
      CHECK(got.entries[i].score == list.entries[i].score); // bitwise
    }
  }

  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("q1 ZZ d1 1 0.5 tag\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_run(path), DataError);
  CHECK_THROWS_AS(write_run(path, run, "bad tag"), UsageError);
  std::filesystem::remove(path);
}

TEST_CASE("sentence similarity is symmetric and maximal for self pairs") {
  Corpus corpus;
  Article a;
  a.id = "s1";
  a.title = "semantic retrieval methods";
  a.abstract_text = "dense encoders for ranking and retrieval of articles";
  corpus.add(a);
  std::vector<std::string> texts{a.title + " " + a.abstract_text};
  const Vocab vocab = Vocab::build(texts, 64);

  nn::EncoderConfig cfg;
  cfg.hidden = 8;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.ffn = 16;
  cfg.vocab = vocab.size();
  cfg.max_query = 8;
  cfg.max_doc = 12;
  cfg.seed = 44;
  const auto params = init_retriever_params(cfg);

  const std::vector<std::string> candidates{
      "dense encoders for ranking",
      "retrieval of articles",
      "semantic retrieval methods",
      "ranking and retrieval",
  };
  const std::string self = candidates[2];
  double best = -1e300;
  std::string best_text;
  for (const auto& cand : candidates) {
    const double sim = sentence_similarity(cfg, params, "qenc.", vocab, self, cand, true);
    const double flipped = sentence_similarity(cfg, params, "qenc.", vocab, cand, self, true);
    CHECK(sim == flipped);
    if (sim > best) {
      best = sim;
      best_text = cand;
    }
  }
  CHECK(best_text == self);
  CHECK(best == doctest::Approx(1.0).epsilon(1e-6)); // cosine self-similarity

  // Inner product differs from cosine in general but keeps symmetry.
  const double ip = sentence_similarity(cfg, params, "qenc.", vocab, candidates[0],
                                        candidates[1]);
  const double ip_flipped = sentence_similarity(cfg, params, "qenc.", vocab, candidates[1],
                                                candidates[0]);
  CHECK(ip == ip_flipped);
}
