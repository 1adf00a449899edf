#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/gradcheck.hpp"
#include "core/gvp.hpp"
#include "core/params.hpp"
#include "core/tape.hpp"
#include "doctest.h"

using namespace gvpnn;

namespace {

Tensor random_tensor(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  Tensor t(rows, cols);
  for (double& x : t.flat()) x = dist(rng);
  return t;
}

}  // namespace

TEST_CASE("record computes forward values and appends") {
  Tape tape;
  ValId x = tape.leaf(Tensor::scalar(2.0));
  ValId y = tape.leaf(Tensor::scalar(3.0));
  const std::size_t before = tape.size();
  ValId s = tape.add(x, y);
  CHECK(tape.size() == before + 1);
  CHECK(tape.val(s)(0, 0) == 5.0);
}

TEST_CASE("replay reproduces recorded values bit-exactly") {
  Tape tape;
  std::mt19937_64 rng(4);
  ValId v = tape.leaf(random_tensor(5, 3, rng()));
  ValId w = tape.leaf(random_tensor(4, 5, rng()));
  ValId g = tape.leaf(random_tensor(4, 1, rng()));
  ValId out = tape.gate_rows(g, tape.matmul(w, v));
  ValId n = tape.row_norms_safe(out, 1e-8);
  ValId loss = tape.sum(tape.sigmoid(n));
  CHECK(max_abs_diff(tape.replay(out), tape.val(out)) == 0.0);
  CHECK(max_abs_diff(tape.replay(loss), tape.val(loss)) == 0.0);
}

TEST_CASE("unregistered primitive is rejected") {
  Tape tape;
  ValId x = tape.leaf(Tensor::scalar(1.0));
  CHECK_THROWS_AS(tape.record(static_cast<Op>(200), {x}), Error);
  CHECK_THROWS_AS(tape.record(Op::kLeaf, {}), Error);
  CHECK_THROWS_AS(tape.record(Op::kAdd, {x}), Error);        // wrong arity
  CHECK_THROWS_AS(tape.record(Op::kAdd, {x, ValId(99)}), Error);  // operand not on tape
}

TEST_CASE("backward: quadratic and constant") {
  Tape tape;
  ValId x = tape.leaf(Tensor::scalar(3.0), true);
  ValId p = tape.leaf(Tensor::scalar(7.0), true);  // unused parameter
  ValId f = tape.hadamard(x, x);
  auto adj = tape.backward(f);
  CHECK(adj[std::size_t(x)](0, 0) == 6.0);
  CHECK(adj[std::size_t(p)].empty());  // never reached: gradient identically zero
}

TEST_CASE("backward requires a scalar output") {
  Tape tape;
  ValId v = tape.leaf(random_tensor(2, 3, 5));
  CHECK_THROWS_AS(tape.backward(v), Error);
}

TEST_CASE("backward is linear in the output seed") {
  std::mt19937_64 rng(21);
  Tape tape;
  ValId w = tape.leaf(random_tensor(3, 4, rng()), true);
  ValId x = tape.leaf(random_tensor(4, 1, rng()));
  ValId loss = tape.sum(tape.relu(tape.matmul(w, x)));
  ValId scaled_loss = tape.scale(loss, 2.5);
  auto g1 = tape.backward(loss);
  auto g2 = tape.backward(scaled_loss);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      CHECK(std::fabs(g2[std::size_t(w)](r, c) - 2.5 * g1[std::size_t(w)](r, c)) <= 1e-12);
}

TEST_CASE("sum rule: grad(f+g) = grad f + grad g") {
  std::mt19937_64 rng(22);
  Tape tape;
  ValId w = tape.leaf(random_tensor(4, 4, rng()), true);
  ValId x = tape.leaf(random_tensor(4, 1, rng()));
  ValId f = tape.sum(tape.sigmoid(tape.matmul(w, x)));
  ValId g = tape.frob_norm_safe(tape.matmul(w, x), 1e-8);
  ValId fg = tape.add(f, g);
  auto af = tape.backward(f);
  auto ag = tape.backward(g);
  auto afg = tape.backward(fg);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      CHECK(std::fabs(afg[std::size_t(w)](r, c) -
                      (af[std::size_t(w)](r, c) + ag[std::size_t(w)](r, c))) <= 1e-12);
}

TEST_CASE("safe norm gradient at V = 0 is the zero row") {
  Tape tape;
  ValId v = tape.leaf(Tensor(3, 3), true);
  ValId loss = tape.sum(tape.row_norms_safe(v, 1e-8));
  auto adj = tape.backward(loss);
  CHECK(max_abs(adj[std::size_t(v)]) == 0.0);
}

namespace {

// Central-difference check of one scalar objective built from a fresh tape
// each evaluation.
void check_op_gradients(const std::function<ValId(Tape&, const ParamBinding&)>& build,
                        ParamStore& params, double tol, std::uint64_t seed) {
  Tape tape;
  ParamBinding binding = bind_params(tape, params);
  ValId loss = build(tape, binding);
  Grads grads(params);
  grads.accumulate(tape.backward(loss), binding, 1.0);
  auto eval = [&]() {
    Tape t2;
    ParamBinding b2 = bind_params(t2, params);
    return t2.val(build(t2, b2))(0, 0);
  };
  GradCheckResult r = finite_diff_check(params, eval, grads, 1e-5, 100, seed);
  CHECK(r.max_rel_err <= tol);
}

}  // namespace

TEST_CASE("every primitive's reverse rule matches finite differences") {
  std::mt19937_64 rng(31);

  ParamStore params;
  params.add("w", random_tensor(4, 5, rng()));
  params.add("x", random_tensor(5, 3, rng()));
  params.add("b", random_tensor(4, 1, rng()));
  params.add("g", random_tensor(4, 1, rng()));
  params.add("u", random_tensor(5, 1, rng()));
  params.add("t", Tensor::scalar(0.7));
  params.add("wg", random_tensor(4, 4, rng()));
  // Keep pow/exp arguments safely positive.
  params.add("pos", random_tensor(4, 1, rng() | 1, 0.25));
  for (double& x : params.at(params.index_of("pos")).flat()) x = 1.0 + std::fabs(x);

  auto with = [&](const char* name, const ParamBinding& b) {
    return b.leaves[std::size_t(params.index_of(name))];
  };

  using Builder = std::function<ValId(Tape&, const ParamBinding&)>;
  std::vector<std::pair<const char*, Builder>> cases;
  cases.emplace_back("matmul+sum", [&](Tape& t, const ParamBinding& b) {
    return t.sum(t.matmul(with("w", b), with("x", b)));
  });
  cases.emplace_back("affine", [&](Tape& t, const ParamBinding& b) {
    return t.sum(t.affine(with("w", b), with("u", b), with("b", b)));
  });
  cases.emplace_back("add/scale/add_const", [&](Tape& t, const ParamBinding& b) {
    ValId two = t.scale(with("g", b), 2.0);
    return t.sum(t.add_const(t.add(two, with("b", b)), 0.5));
  });
  cases.emplace_back("bcast ops", [&](Tape& t, const ParamBinding& b) {
    ValId shifted = t.add_bcast(with("g", b), with("t", b));
    return t.sum(t.mul_bcast(shifted, with("t", b)));
  });
  cases.emplace_back("hadamard", [&](Tape& t, const ParamBinding& b) {
    return t.sum(t.hadamard(with("g", b), with("b", b)));
  });
  cases.emplace_back("mask", [&](Tape& t, const ParamBinding& b) {
    Tensor mask(4, 1);
    mask(0, 0) = 1.25;
    mask(2, 0) = 0.5;
    return t.sum(t.mul_mask(with("g", b), std::move(mask)));
  });
  cases.emplace_back("row_norms", [&](Tape& t, const ParamBinding& b) {
    return t.sum(t.row_norms_safe(with("x", b), 1e-8));
  });
  cases.emplace_back("frob_norm", [&](Tape& t, const ParamBinding& b) {
    return t.frob_norm_safe(with("w", b), 1e-8);
  });
  cases.emplace_back("concat+gate", [&](Tape& t, const ParamBinding& b) {
    ValId v = t.concat_rows(with("x", b), t.matmul(with("w", b), with("x", b)));
    ValId gate = t.concat_rows(with("g", b), t.sigmoid(with("u", b)));
    return t.sum(t.gate_rows(gate, v));
  });
  cases.emplace_back("relu", [&](Tape& t, const ParamBinding& b) {
    return t.sum(t.relu(t.matmul(with("w", b), with("x", b))));
  });
  cases.emplace_back("sigmoid/identity", [&](Tape& t, const ParamBinding& b) {
    return t.sum(t.sigmoid(t.identity(with("b", b))));
  });
  cases.emplace_back("exp/pow", [&](Tape& t, const ParamBinding& b) {
    ValId e = t.exp(t.scale(with("pos", b), 0.5));
    return t.sum(t.pow_const(e, -0.5));
  });
  cases.emplace_back("mean_n", [&](Tape& t, const ParamBinding& b) {
    std::vector<ValId> xs = {with("g", b), with("b", b), t.relu(with("g", b))};
    return t.sum(t.mean_n(xs));
  });
  cases.emplace_back("vector_gate", [&](Tape& t, const ParamBinding& b) {
    ValId z = t.matmul(with("w", b), with("x", b));  // 4 x 3
    return t.sum(t.vector_gate(with("wg", b), with("g", b), with("b", b), z));
  });
  cases.emplace_back("vector_norm_gate", [&](Tape& t, const ParamBinding& b) {
    ValId z = t.matmul(with("w", b), with("x", b));
    return t.sum(t.vector_norm_gate(z, 1e-8));
  });
  cases.emplace_back("softmax_ce", [&](Tape& t, const ParamBinding& b) {
    return t.softmax_ce(with("b", b), 2);
  });

  for (auto& [name, builder] : cases) {
    CAPTURE(name);
    check_op_gradients(builder, params, 2e-6, 1234);
  }
}

TEST_CASE("finite_diff_check: linear objective is near-exact") {
  ParamStore params;
  params.add("w", random_tensor(3, 3, 77));
  auto build = [&](Tape& t, const ParamBinding& b) { return t.sum(b.leaves[0]); };
  Tape tape;
  ParamBinding binding = bind_params(tape, params);
  Grads grads(params);
  grads.accumulate(tape.backward(build(tape, binding)), binding, 1.0);
  auto eval = [&]() {
    Tape t2;
    ParamBinding b2 = bind_params(t2, params);
    return t2.val(build(t2, b2))(0, 0);
  };
  GradCheckResult r = finite_diff_check(params, eval, grads, 1e-5, 100, 5);
  CHECK(r.max_rel_err <= 1e-10);
  CHECK(r.coords_checked == 9);
}

TEST_CASE("finite_diff_check: full gated GVP with MSE loss") {
  GvpConfig cfg{3, 4, 5, 6};
  cfg.hidden_vectors = 7;
  GvpParams init = gvp_init(cfg, std::uint64_t(11));
  ParamStore params;
  params.add("wh", init.wh);
  params.add("wmu", init.wmu);
  params.add("wm", init.wm);
  params.add("bm", init.bm);
  params.add("wg", init.wg);
  params.add("bg", init.bg);

  const Tensor xs = random_tensor(3, 1, 101);
  const Tensor xv = random_tensor(4, 3, 102);
  const Tensor target_s = random_tensor(5, 1, 103);
  const Tensor target_v = random_tensor(6, 3, 104);

  auto build = [&](Tape& t, const ParamBinding& b) {
    GvpParamIds ids{b.leaves[0], b.leaves[1], b.leaves[2], b.leaves[3], b.leaves[4], b.leaves[5]};
    SvIds in{t.leaf(xs), t.leaf(xv)};
    SvIds out = gvp_forward(t, cfg, ids, in);
    ValId ds = t.add(out.s, t.scale(t.leaf(target_s), -1.0));
    ValId dv = t.add(out.V, t.scale(t.leaf(target_v), -1.0));
    ValId loss_s = t.sum(t.hadamard(ds, ds));
    ValId loss_v = t.sum(t.hadamard(dv, dv));
    return t.scale(t.add(loss_s, loss_v), 1.0 / double(5 + 18));
  };

  Tape tape;
  ParamBinding binding = bind_params(tape, params);
  ValId loss = build(tape, binding);
  Grads grads(params);
  grads.accumulate(tape.backward(loss), binding, 1.0);
  auto eval = [&]() {
    Tape t2;
    ParamBinding b2 = bind_params(t2, params);
    return t2.val(build(t2, b2))(0, 0);
  };
  GradCheckResult r = finite_diff_check(params, eval, grads, 1e-5, 100, 2024);
  CHECK(r.max_rel_err <= 1e-5);
  CHECK(r.coords_checked >= 100);
}
