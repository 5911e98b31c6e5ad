#include "cascade/losses.hpp"

#include "cascade/click.hpp"
#include "cascade/errors.hpp"
#include "support/gradcheck.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cascade;
using namespace cascade::nn;
using cascade::testing::check_gradients;
using cascade::testing::random_tensor;

namespace {

// Independent scalar reference: per-row NLL of the diagonal under a
// max-stabilized softmax, mixed across both directions.
double naive_bidirectional_loss(const Tensor<double>& s, const std::vector<double>& w,
                                double alpha) {
  const std::size_t b = s.dim(0);
  auto row_nll = [&](bool transpose) {
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      double mx = -1e300;
      for (std::size_t j = 0; j < b; ++j) {
        mx = std::max(mx, transpose ? s.at(j, i) : s.at(i, j));
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < b; ++j) {
        denom += std::exp((transpose ? s.at(j, i) : s.at(i, j)) - mx);
      }
      total += w[i] * (std::log(denom) - (s.at(i, i) - mx));
    }
    return total;
  };
  return alpha * row_nll(false) + (1.0 - alpha) * row_nll(true);
}

Tensor<double> score_matrix(const Tensor<double>& q, const Tensor<double>& d) {
  const std::size_t b = q.dim(0);
  const std::size_t h = q.dim(1);
  Tensor<double> s({b, b});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < h; ++k) acc += q.at(i, k) * d.at(j, k);
      s.at(i, j) = acc;
    }
  }
  return s;
}

} // namespace

TEST_CASE("click weights match the exact-logarithm cases") {
  const std::vector<double> u = click_weights({1, 1, 1, 1});
  for (const double w : u) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));

  const std::vector<double> two = click_weights({1, 3});
  CHECK(two[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const std::vector<double> three = click_weights({1, 3, 7});
  CHECK(three[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(three[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(three[2] == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
}

TEST_CASE("click weights always sum to one and reject zero counts") {
  Rng rng(derive_seed(3, "weights"));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> clicks(1 + rng.uniform_index(40));
    for (auto& c : clicks) c = 1 + rng.uniform_index(1000);
    const std::vector<double> w = click_weights(clicks);
    double sum = 0.0;
    for (const double x : w) {
      CHECK(x > 0.0);
      sum += x;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(click_weights({1, 0, 2}), DataError);
  CHECK_THROWS_AS(click_weights({}), UsageError);
}

TEST_CASE("permuting click counts permutes the weights identically") {
  const std::vector<std::uint64_t> clicks{4, 9, 1, 700, 21};
  const std::vector<double> w = click_weights(clicks);
  const std::vector<std::uint64_t> perm{700, 1, 21, 4, 9};
  const std::vector<double> wp = click_weights(perm);
  CHECK(wp[0] == w[3]);
  CHECK(wp[1] == w[2]);
  CHECK(wp[2] == w[4]);
  CHECK(wp[3] == w[0]);
  CHECK(wp[4] == w[1]);
}

TEST_CASE("identical embeddings give exactly ln B for any alpha and weights") {
  for (const std::size_t b : {2u, 4u, 7u}) {
    Tensor<double> emb({b, 3});
    for (std::size_t i = 0; i < emb.size(); ++i) emb.data[i] = 0.37;
    std::vector<std::uint64_t> clicks(b);
    for (std::size_t i = 0; i < b; ++i) clicks[i] = 1 + 5 * i;
    const std::vector<double> w = click_weights(clicks);
    for (const double alpha : {0.0, 0.5, 0.8, 1.0}) {
      Graph<double> g;
      const Var q = g.leaf(emb);
      const Var d = g.leaf(emb);
      const Var loss = retriever_batch_loss(g, q, d, w, alpha);
      CHECK(g.scalar_value(loss) ==
            doctest::Approx(std::log(static_cast<double>(b))).epsilon(1e-12));
    }
  }
}

TEST_CASE("strongly separated diagonal gives ln(1 + e^-10)") {
  // q = d = sqrt(10) * I produces the score matrix [[10,0],[0,10]].
  const double r = std::sqrt(10.0);
  Tensor<double> q({2, 2});
  q.at(0, 0) = r;
  q.at(1, 1) = r;
  const std::vector<double> w{0.5, 0.5};
  const double expected = std::log(1.0 + std::exp(-10.0));
  for (const double alpha : {0.0, 0.25, 0.8, 1.0}) {
    Graph<double> g;
    const Var qa = g.leaf(q);
    const Var qb = g.leaf(q);
    const Var loss = retriever_batch_loss(g, qa, qb, w, alpha);
    CHECK(g.scalar_value(loss) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(g.scalar_value(loss) == doctest::Approx(4.54e-5).epsilon(1e-2));
  }
}

TEST_CASE("graph loss matches the naive reference on random batches") {
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t b = 2 + trial % 5;
    const Tensor<double> q = random_tensor({b, 4}, "q" + std::to_string(trial), 1.5);
    const Tensor<double> d = random_tensor({b, 4}, "d" + std::to_string(trial), 1.5);
    std::vector<std::uint64_t> clicks(b);
    for (std::size_t i = 0; i < b; ++i) clicks[i] = 1 + (trial + 3 * i) % 50;
    const std::vector<double> w = click_weights(clicks);
    const double alpha = 0.1 * (trial % 11);

    Graph<double> g;
    const Var qv = g.leaf(q);
    const Var dv = g.leaf(d);
    const double got = g.scalar_value(retriever_batch_loss(g, qv, dv, w, alpha));
    const Tensor<double> s = score_matrix(q, d);
    CHECK(got == doctest::Approx(naive_bidirectional_loss(s, w, alpha)).epsilon(1e-12));
    CHECK(got == doctest::Approx(retriever_batch_loss_value(s, w, alpha)).epsilon(1e-12));
  }
}

TEST_CASE("alpha 0.5 loss is invariant under swapping the towers") {
  const Tensor<double> q = random_tensor({5, 3}, "swap-q");
  const Tensor<double> d = random_tensor({5, 3}, "swap-d");
  const std::vector<double> w = click_weights({2, 9, 1, 4, 30});
  Graph<double> g1;
  const double a = g1.scalar_value(
      retriever_batch_loss(g1, g1.leaf(q), g1.leaf(d), w, 0.5));
  Graph<double> g2;
  const double b = g2.scalar_value(
      retriever_batch_loss(g2, g2.leaf(d), g2.leaf(q), w, 0.5));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("retriever loss gradients match finite differences") {
  const std::size_t b = 4, h = 3;
  const std::vector<double> w = click_weights({1, 6, 2, 11});
  const auto report = check_gradients(
      {random_tensor({b, h}, "fd-q", 1.2), random_tensor({b, h}, "fd-d", 1.2)},
      [&](Graph<double>& g, const std::vector<Var>& leaves) {
        return retriever_batch_loss(g, leaves[0], leaves[1], w, 0.8);
      });
  INFO("worst entry ", report.worst);
  CHECK(report.max_rel_error < 1e-3);
}

TEST_CASE("retriever loss rejects bad shapes and degenerate batches") {
  Graph<double> g;
  const Var q = g.leaf(random_tensor({1, 4}, "single"));
  CHECK_THROWS_AS(retriever_batch_loss(g, q, q, {1.0}, 0.5), UsageError);
  const Var a = g.leaf(random_tensor({3, 4}, "a"));
  const Var bb = g.leaf(random_tensor({3, 5}, "b"));
  CHECK_THROWS_AS(retriever_batch_loss(g, a, bb, {0.5, 0.25, 0.25}, 0.5), UsageError);
  const Var c = g.leaf(random_tensor({3, 4}, "c"));
  CHECK_THROWS_AS(retriever_batch_loss(g, a, c, {0.5, 0.5}, 0.5), UsageError);
  CHECK_THROWS_AS(retriever_batch_loss(g, a, c, {0.5, 0.25, 0.25}, 1.5), UsageError);
}

TEST_CASE("reranker loss hits the closed-form cases") {
  {
    // positive equal to three negatives: uniform softmax over 4.
    Graph<double> g;
    Tensor<double> s({4});
    for (auto& x : s.data) x = 1.3;
    const Var loss = reranker_loss(g, g.leaf(s));
    CHECK(g.scalar_value(loss) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  {
    // dominant positive: loss collapses toward zero.
    Graph<double> g;
    Tensor<double> s({2});
    s.data[0] = 50.0;
    s.data[1] = 0.0;
    CHECK(g.scalar_value(reranker_loss(g, g.leaf(s))) < 1e-20);
  }
  {
    // pos=1 over two zeros: ln(1 + 2/e).
    Graph<double> g;
    Tensor<double> s({3});
    s.data[0] = 1.0;
    const double expected = std::log(1.0 + 2.0 * std::exp(-1.0));
    CHECK(g.scalar_value(reranker_loss(g, g.leaf(s))) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.55147).epsilon(1e-4));
    CHECK(reranker_loss_value(1.0, {0.0, 0.0}) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("reranker loss is monotone in the positive and each negative") {
  auto value = [](double pos, std::vector<double> negs) {
    return reranker_loss_value(pos, negs);
  };
  const std::vector<double> negs{0.3, -1.0, 0.9};
  double prev = value(-2.0, negs);
  for (double pos = -1.5; pos < 2.1; pos += 0.5) {
    const double cur = value(pos, negs);
    CHECK(cur < prev);
    prev = cur;
  }
  double prev_neg = value(0.5, {-3.0, 0.1});
  for (double n = -2.0; n < 2.1; n += 0.5) {
    const double cur = value(0.5, {n, 0.1});
    CHECK(cur > prev_neg);
    prev_neg = cur;
  }
}

TEST_CASE("reranker loss gradients match finite differences") {
  const auto report = check_gradients({random_tensor({6}, "fd-scores", 2.0)},
                                      [](Graph<double>& g, const std::vector<Var>& leaves) {
                                        return reranker_loss(g, leaves[0]);
                                      });
  CHECK(report.max_rel_error < 1e-3);
}

TEST_CASE("reranker loss requires at least one negative") {
  Graph<double> g;
  Tensor<double> s({1});
  s.data[0] = 2.0;
  CHECK_THROWS_AS(reranker_loss(g, g.leaf(s)), UsageError);
  CHECK_THROWS_AS(reranker_loss_value(2.0, {}), UsageError);
}

TEST_CASE("loss values are stable far from zero") {
  // Max-subtraction keeps huge scores from overflowing.
  CHECK(reranker_loss_value(1000.0, {999.0}) ==
        doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-12));
  Tensor<double> s({2, 2});
  s.at(0, 0) = 800.0;
  s.at(1, 1) = 800.0;
  const double loss = retriever_batch_loss_value(s, {0.5, 0.5}, 0.5);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(std::log(1.0 + std::exp(-800.0))).epsilon(1e-12));
}
