#include "cascade/graph.hpp"

#include "support/gradcheck.hpp"

#include <doctest.h>

#include <limits>

using namespace cascade;
using namespace cascade::nn;
using cascade::testing::check_gradients;
using cascade::testing::random_tensor;
using cascade::testing::scalarize;

namespace {
constexpr double kTol = 1e-3;
}

TEST_CASE("tensor shape accounting") {
  Tensor<double> t(std::vector<std::size_t>{2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  t.at(1, 2, 3) = 5.0;
  CHECK(t.data[23] == 5.0);
  CHECK(t.all_finite());
  t.data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("gemm kernels agree with naive triple loops") {
  const auto a = random_tensor({3, 4}, "gemm-a");
  const auto b = random_tensor({4, 5}, "gemm-b");
  Tensor<double> c(std::vector<std::size_t>{3, 5});
  gemm_nn(a.ptr(), b.ptr(), c.ptr(), 3, 4, 5, false);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 4; ++k) want += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  const auto bt = random_tensor({5, 4}, "gemm-bt");
  gemm_nt(a.ptr(), bt.ptr(), c.ptr(), 3, 4, 5, false);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 4; ++k) want += a.at(i, k) * bt.at(j, k);
      CHECK(c.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  const auto at = random_tensor({4, 3}, "gemm-at");
  gemm_tn(at.ptr(), b.ptr(), c.ptr(), 4, 3, 5, false);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double want = 0.0;
      for (std::size_t k = 0; k < 4; ++k) want += at.at(k, i) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("linear gradients match finite differences") {
  const auto report = check_gradients(
      {random_tensor({3, 4}, "lin-x"), random_tensor({4, 5}, "lin-w"),
       random_tensor({5}, "lin-b")},
      [](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.linear(v[0], v[1], v[2]));
      });
  CAPTURE(report.worst);
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("linear flattens leading dimensions") {
  const auto report = check_gradients(
      {random_tensor({2, 3, 4}, "lin3-x"), random_tensor({4, 2}, "lin3-w"),
       random_tensor({2}, "lin3-b")},
      [](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.linear(v[0], v[1], v[2]));
      });
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("embed gradients accumulate over repeated ids") {
  BatchTokens tokens;
  tokens.batch = 2;
  tokens.time = 4;
  tokens.ids = {0, 3, 3, 2, 1, 0, 2, 2}; // id 3 and 2 repeat
  tokens.lengths = {4, 3};
  const auto report = check_gradients(
      {random_tensor({5, 4}, "emb-tok"), random_tensor({4, 4}, "emb-pos")},
      [tokens](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.embed(v[0], v[1], tokens));
      });
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("attention gradients with a padding mask") {
  const std::vector<std::size_t> lengths{4, 2};
  const auto report = check_gradients(
      {random_tensor({2, 4, 6}, "att-q"), random_tensor({2, 4, 6}, "att-k"),
       random_tensor({2, 4, 6}, "att-v")},
      [lengths](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.attention(v[0], v[1], v[2], lengths, 2));
      });
  CAPTURE(report.worst);
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("attention ignores padded key positions") {
  // Two forward passes where only the padded tail of k/v differs must agree
  // bit for bit on the valid rows.
  auto q = random_tensor({1, 3, 4}, "mask-q");
  auto k = random_tensor({1, 3, 4}, "mask-k");
  auto v = random_tensor({1, 3, 4}, "mask-v");
  Graph<double> g1;
  const Var o1 = g1.attention(g1.leaf(q), g1.leaf(k), g1.leaf(v), {2}, 2);
  for (std::size_t c = 0; c < 4; ++c) {
    k.at(0, 2, c) += 100.0;
    v.at(0, 2, c) -= 50.0;
  }
  Graph<double> g2;
  const Var o2 = g2.attention(g2.leaf(q), g2.leaf(k), g2.leaf(v), {2}, 2);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(g1.value(o1).at(0, t, c) == g2.value(o2).at(0, t, c));
    }
  }
}

TEST_CASE("layer_norm gradients match finite differences") {
  const auto report = check_gradients(
      {random_tensor({3, 6}, "ln-x"), random_tensor({6}, "ln-g", 0.5),
       random_tensor({6}, "ln-b", 0.5)},
      [](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.layer_norm(v[0], v[1], v[2], 1e-5));
      });
  CAPTURE(report.worst);
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("gelu gradients match finite differences") {
  const auto report = check_gradients({random_tensor({9}, "gelu-x", 2.0)},
                                      [](Graph<double>& g, const std::vector<Var>& v) {
                                        return scalarize(g, g.gelu(v[0]));
                                      });
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("matmul_nt and log_softmax gradients match finite differences") {
  const auto report = check_gradients(
      {random_tensor({3, 4}, "mm-a"), random_tensor({3, 4}, "mm-b")},
      [](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.log_softmax_rows(g.matmul_nt(v[0], v[1])));
      });
  CAPTURE(report.worst);
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("rows_dot gradients match finite differences") {
  const auto report = check_gradients(
      {random_tensor({4, 5}, "rd-x"), random_tensor({5}, "rd-w"), random_tensor({1}, "rd-b")},
      [](Graph<double>& g, const std::vector<Var>& v) {
        return scalarize(g, g.rows_dot(v[0], v[1], v[2]));
      });
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("structural op gradients match finite differences") {
  const auto report = check_gradients(
      {random_tensor({4, 4}, "st-a"), random_tensor({4, 4}, "st-b")},
      [](Graph<double>& g, const std::vector<Var>& v) {
        const Var sum = g.add(v[0], v[1]);
        const Var mix = g.lincomb(0.8, sum, -0.3, g.transpose(v[1]));
        const Var d = g.diag(mix);
        const Var s = g.slice1d(d, 1, 3);
        const Var p1 = g.pick(s, 0);
        const Var p2 = g.pick(d, 3);
        const Var tot = g.sum_all(g.neg(g.scale(mix, 0.5)));
        return g.combine({p1, p2, tot}, {1.0, -2.0, 0.7});
      });
  CAPTURE(report.worst);
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("cls and reshape gradients match finite differences") {
  const auto report = check_gradients({random_tensor({2, 3, 4}, "cls-x")},
                                      [](Graph<double>& g, const std::vector<Var>& v) {
                                        const Var c = g.cls(v[0]);
                                        return scalarize(g, g.reshape(c, {4, 2}));
                                      });
  CHECK(report.max_rel_error < kTol);
}

TEST_CASE("constants receive no gradient and block propagation") {
  Graph<double> g;
  const Var c = g.constant(Tensor<double>::scalar(3.0));
  const Var l = g.leaf(Tensor<double>::scalar(2.0));
  const Var s = g.combine({c, l}, {1.0, 5.0});
  g.backward(s);
  CHECK(g.grad(l).data[0] == 5.0);
  CHECK(g.grad(c).data[0] == 0.0);
}

TEST_CASE("backward guards") {
  Graph<double> g;
  const Var l = g.leaf(random_tensor({2, 2}, "guard"));
  CHECK_THROWS_AS((void)g.grad(l), UsageError);     // before backward
  CHECK_THROWS_AS(g.backward(l), UsageError);       // non-scalar loss
  const Var s = g.sum_all(l);
  g.backward(s);
  CHECK_THROWS_AS(g.backward(s), UsageError);       // double backward
  for (double v : g.grad(l).data) CHECK(v == 1.0);
}

TEST_CASE("shape mismatches are rejected") {
  Graph<double> g;
  const Var a = g.leaf(random_tensor({2, 3}, "sm-a"));
  const Var b = g.leaf(random_tensor({3, 2}, "sm-b"));
  CHECK_THROWS_AS(g.add(a, b), UsageError);
  CHECK_THROWS_AS(g.matmul_nt(a, b), UsageError);
  CHECK_THROWS_AS(g.diag(a), UsageError);
  CHECK_THROWS_AS(g.reshape(a, {7}), UsageError);
}
