#include <doctest.h>

#include <cmath>
#include <sstream>

#include "finite_difference.hpp"
#include "scaner/common/error.hpp"
#include "scaner/nn/adam.hpp"
#include "scaner/nn/checkpoint.hpp"
#include "scaner/nn/graph.hpp"

using namespace scaner;
using namespace scaner::nn;

namespace {

// Exercises every op once: embedding -> attention-like block -> layer norm
// -> pooled head -> cross entropy.
double forward(const ParameterStore& ps, Graph* out_graph, Var* out_loss) {
  Graph local(&ps);
  Graph& g = out_graph ? *out_graph : local;
  const Var x = g.embedding(ps.index("emb"), {0, 2, 1, 2});
  const Var q = g.matmul(x, g.param(ps.index("wq")));
  const Var k = g.matmul(x, g.param(ps.index("wk")));
  const Var att = g.softmax_rows(g.scale(g.matmul_nt(q, k), 0.5));
  const Var mixed = g.matmul(att, x);
  const Var left = g.slice_cols(mixed, 0, 2);
  const Var right = g.slice_cols(mixed, 2, 2);
  const Var recombined = g.concat_cols({g.gelu(left), g.tanh(right)});
  const Var prefixed = g.concat_rows(g.param(ps.index("v0")), recombined);
  const Var normed =
      g.layer_norm_rows(g.add(prefixed, prefixed), g.param(ps.index("ln_g")), g.param(ps.index("ln_b")));
  const Var pooled = g.add(g.slice_rows(normed, 0, 1), g.mean_rows(normed));
  const Var logits = g.add_row(g.matmul(pooled, g.param(ps.index("head"))), g.param(ps.index("bias")));
  const Var loss = g.cross_entropy(logits, 2, 1.7);
  if (out_loss) *out_loss = loss;
  return g.value(loss)(0, 0);
}

ParameterStore make_params(std::uint64_t seed) {
  Rng rng(seed);
  ParameterStore ps;
  ps.add("emb", normal_matrix(3, 4, 0.8, rng));
  ps.add("wq", normal_matrix(4, 4, 0.5, rng));
  ps.add("wk", normal_matrix(4, 4, 0.5, rng));
  ps.add("v0", normal_matrix(1, 4, 0.5, rng));
  ps.add("ln_g", Matrix::Ones(1, 4) + normal_matrix(1, 4, 0.1, rng));
  ps.add("ln_b", normal_matrix(1, 4, 0.1, rng));
  ps.add("head", normal_matrix(4, 3, 0.5, rng));
  ps.add("bias", normal_matrix(1, 3, 0.1, rng));
  return ps;
}

}  // namespace

TEST_CASE("every graph op matches central finite differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ParameterStore ps = make_params(seed);
    Graph g(&ps);
    Var loss;
    forward(ps, &g, &loss);
    g.backward(loss);
    Gradients grads = ps.zeros_like();
    g.accumulate(grads);
    const auto result = testing::check_gradients(ps, grads, [](const ParameterStore& p) {
      return forward(p, nullptr, nullptr);
    });
    CAPTURE(result.worst_param);
    CHECK(result.max_rel_error < 1e-6);
  }
}

TEST_CASE("softmax rows sum to one and survive large logits") {
  Graph g;
  Matrix z(2, 3);
  z << 1000.0, 1001.0, 999.0, -5.0, 0.0, 5.0;
  const Matrix& y = g.value(g.softmax_rows(g.constant(z)));
  CHECK(y.allFinite());
  CHECK(std::abs(y.row(0).sum() - 1.0) < 1e-12);
  CHECK(std::abs(y.row(1).sum() - 1.0) < 1e-12);
}

TEST_CASE("layer norm of a constant row stays finite") {
  Graph g;
  const Var x = g.constant(Matrix::Zero(2, 6));
  const Var y = g.layer_norm_rows(x, g.constant(Matrix::Ones(1, 6)), g.constant(Matrix::Zero(1, 6)));
  CHECK(g.value(y).allFinite());
}

TEST_CASE("cross entropy of uniform logits is ln C") {
  Graph g;
  const Var loss = g.cross_entropy(g.constant(Matrix::Zero(1, 2)), 0);
  CHECK(g.value(loss)(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("shape errors are reported") {
  Graph g;
  const Var a = g.constant(Matrix::Zero(2, 3));
  const Var b = g.constant(Matrix::Zero(2, 3));
  CHECK_THROWS_AS(g.matmul(a, b), ConfigError);
  CHECK_THROWS_AS(g.add(a, g.constant(Matrix::Zero(3, 2))), ConfigError);
  CHECK_THROWS_AS(g.backward(a), ConfigError);
}

TEST_CASE("adam warmup ramps linearly then holds") {
  ParameterStore ps;
  ps.add("w", Matrix::Zero(1, 1));
  Adam adam(ps, {.learning_rate = 0.1, .warmup_steps = 4});
  CHECK(adam.learning_rate_at(1) == doctest::Approx(0.025));
  CHECK(adam.learning_rate_at(4) == doctest::Approx(0.1));
  CHECK(adam.learning_rate_at(400) == doctest::Approx(0.1));
}

TEST_CASE("adam minimizes a quadratic") {
  ParameterStore ps;
  ps.add("w", Matrix::Constant(1, 2, 3.0));
  Adam adam(ps, {.learning_rate = 0.05});
  for (int i = 0; i < 2000; ++i) {
    Gradients g{2.0 * ps.value(0)};
    adam.step(ps, g);
  }
  CHECK(ps.value(0).norm() < 1e-3);
}

TEST_CASE("checkpoint container round-trips and rejects corruption") {
  Checkpoint ckpt;
  ckpt.kind = "test";
  ckpt.metadata = Json{{"d", 4}, {"labels", {"a", "b"}}};
  ckpt.params = make_params(9);
  const std::string bytes = serialize_checkpoint(ckpt);
  const Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.kind == "test");
  CHECK(back.metadata == ckpt.metadata);
  CHECK(back.params == ckpt.params);
  CHECK(serialize_checkpoint(back) == bytes);

  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), DataError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(deserialize_checkpoint(bad), DataError);
  std::string future = bytes;
  future[8] = 2;  // major version
  CHECK_THROWS_AS(deserialize_checkpoint(future), DataError);
}
