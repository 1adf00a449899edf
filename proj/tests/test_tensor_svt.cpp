#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/svt.hpp"
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

// Independent per-row sqrt-of-sum-of-squares oracle.
std::vector<double> row_norm_oracle(const Tensor& v, double eps) {
  std::vector<double> out;
  for (int i = 0; i < v.rows(); ++i) {
    double ss = eps * eps;
    for (int j = 0; j < v.cols(); ++j) ss += v(i, j) * v(i, j);
    out.push_back(std::sqrt(ss));
  }
  return out;
}

// Naive triple-loop matmul oracle.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
  Tensor c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

}  // namespace

TEST_CASE("row_norms basics") {
  Tensor v = Tensor::from_rows({{3.0, 4.0, 0.0}});
  Tensor n = row_norms(v, 1e-8);
  CHECK(n.rows() == 1);
  CHECK(n(0, 0) == doctest::Approx(5.0).epsilon(1e-9));

  Tensor zero = Tensor::from_rows({{0.0, 0.0, 0.0}});
  CHECK(row_norms(zero, 1e-8)(0, 0) == 1e-8);

  Tensor r = random_tensor(5, 3, 42);
  Tensor n2 = row_norms(r, 1e-8);
  auto oracle = row_norm_oracle(r, 1e-8);
  for (int i = 0; i < 5; ++i) CHECK(std::fabs(n2(i, 0) - oracle[std::size_t(i)]) <= 1e-12);

  CHECK_THROWS_AS(row_norms(r, 0.0), Error);
}

TEST_CASE("lin_map_vectors basics and oracle") {
  Tensor v = random_tensor(3, 3, 7);
  Tensor id = Tensor::identity(3);
  CHECK(max_abs_diff(lin_map_vectors(id, v), v) == 0.0);

  Tensor zero(3, 3);
  CHECK(max_abs(lin_map_vectors(zero, v)) == 0.0);

  Tensor w = random_tensor(4, 6, 8);
  Tensor v6 = random_tensor(6, 3, 9);
  CHECK(max_abs_diff(lin_map_vectors(w, v6), matmul_oracle(w, v6)) <= 1e-12);

  CHECK_THROWS_AS(lin_map_vectors(w, v), Error);  // 6 != 3
}

TEST_CASE("gate_rows basics") {
  Tensor v = random_tensor(2, 3, 11);
  Tensor unit = Tensor::from_rows({{1.0}, {1.0}});
  CHECK(max_abs_diff(gate_rows(unit, v), v) == 0.0);

  Tensor closed(2, 1);
  CHECK(max_abs(gate_rows(closed, v)) == 0.0);

  Tensor g = Tensor::from_rows({{0.5}, {2.0}});
  Tensor v2 = Tensor::from_rows({{2.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
  Tensor expect = Tensor::from_rows({{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}});
  CHECK(max_abs_diff(gate_rows(g, v2), expect) == 0.0);

  CHECK_THROWS_AS(gate_rows(Tensor(3, 1), v), Error);
}

TEST_CASE("apply_orthogonal basics") {
  Tensor v = random_tensor(4, 3, 13);
  CHECK(max_abs_diff(apply_orthogonal(Orthogonal3::identity(), v), v) == 0.0);

  Orthogonal3 mirror(Tensor::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}));
  Tensor z = Tensor::from_rows({{0.0, 0.0, 2.0}});
  Tensor flipped = apply_orthogonal(mirror, z);
  CHECK(flipped(0, 2) == -2.0);

  // Norm preservation for seeded random transforms.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Orthogonal3 r = random_orthogonal(seed, true);
    Tensor rv = apply_orthogonal(r, v);
    auto before = row_norm_oracle(v, 1e-30);
    auto after = row_norm_oracle(rv, 1e-30);
    for (std::size_t i = 0; i < before.size(); ++i)
      CHECK(std::fabs(before[i] - after[i]) <= 1e-12);
  }

  Tensor skewed = Tensor::from_rows({{1, 0.5, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK_THROWS_AS(Orthogonal3{skewed}, Error);
}

TEST_CASE("random_orthogonal determinism, orthogonality, and det signs") {
  Orthogonal3 a = random_orthogonal(0, true);
  Orthogonal3 b = random_orthogonal(0, true);
  CHECK(max_abs_diff(a.matrix(), b.matrix()) == 0.0);

  int plus = 0, minus = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Orthogonal3 r = random_orthogonal(seed, true);
    const Tensor& m = r.matrix();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += m(k, i) * m(k, j);
        CHECK(std::fabs(dot - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
    (r.det() > 0 ? plus : minus)++;
  }
  CHECK(plus > 0);
  CHECK(minus > 0);

  for (std::uint64_t seed = 0; seed < 100; ++seed)
    CHECK(random_orthogonal(seed, false).det() > 0.0);
}

TEST_CASE("svt invariants under orthogonal transforms") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Tensor v = random_tensor(6, 3, seed * 17);
    Orthogonal3 r = random_orthogonal(seed, true);

    // Norms invariant.
    Tensor n1 = row_norms(v, 1e-8);
    Tensor n2 = row_norms(apply_orthogonal(r, v), 1e-8);
    CHECK(max_abs_diff(n1, n2) <= 1e-12);

    // Left linear map commutes with right rotation.
    Tensor w = random_tensor(4, 6, seed * 31);
    Tensor lhs = lin_map_vectors(w, apply_orthogonal(r, v));
    Tensor rhs = apply_orthogonal(r, lin_map_vectors(w, v));
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12);

    // Row gating commutes exactly.
    Tensor g = random_tensor(6, 1, seed * 57);
    Tensor gl = gate_rows(g, apply_orthogonal(r, v));
    Tensor gr = apply_orthogonal(r, gate_rows(g, v));
    CHECK(max_abs_diff(gl, gr) <= 1e-12);
  }
}

TEST_CASE("kernels agree with naive oracles on random small sizes") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 16);
  for (int rep = 0; rep < 25; ++rep) {
    const int a = dim(rng), b = dim(rng), c = dim(rng);
    Tensor w = random_tensor(a, b, rng());
    Tensor x = random_tensor(b, c, rng());
    CHECK(max_abs_diff(matmul(w, x), matmul_oracle(w, x)) <= 1e-12);
  }
}
