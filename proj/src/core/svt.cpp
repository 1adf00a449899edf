#include "svt.hpp"

#include <cmath>
#include <random>

#include "error.hpp"

namespace gvpnn {

SvTuple::SvTuple(Tensor scalars, Tensor vectors) : s(std::move(scalars)), V(std::move(vectors)) {
  require(s.cols() == 1 || s.empty(), "SvTuple: scalar channels must be a column vector");
  require(V.cols() == 3 || V.empty(), "SvTuple: vector channels must have 3 columns");
  require(s.all_finite() && V.all_finite(), "SvTuple: non-finite entries");
}

namespace {

double det3(const Tensor& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace

Orthogonal3::Orthogonal3(Tensor m) : m_(std::move(m)) {
  require(m_.rows() == 3 && m_.cols() == 3, "Orthogonal3: matrix must be 3x3");
  // m^T m = I within 1e-12
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += m_(k, i) * m_(k, j);
      double expect = (i == j) ? 1.0 : 0.0;
      require(std::fabs(dot - expect) <= 1e-12, "Orthogonal3: matrix is not orthogonal");
    }
  }
  require(std::fabs(std::fabs(det3(m_)) - 1.0) <= 1e-12, "Orthogonal3: |det| != 1");
}

Orthogonal3 Orthogonal3::identity() { return Orthogonal3(Tensor::identity(3)); }

double Orthogonal3::det() const { return det3(m_); }

Tensor row_norms(const Tensor& v, double eps) {
  require(eps > 0.0, "row_norms: eps must be positive");
  Tensor out(v.rows(), 1);
  for (int i = 0; i < v.rows(); ++i) {
    double ss = eps * eps;
    for (int j = 0; j < v.cols(); ++j) ss += v(i, j) * v(i, j);
    out(i, 0) = std::sqrt(ss);
  }
  return out;
}

Tensor lin_map_vectors(const Tensor& w, const Tensor& v) {
  require(w.cols() == v.rows(), "lin_map_vectors: inner dimensions disagree");
  return matmul(w, v);
}

Tensor gate_rows(const Tensor& g, const Tensor& v) {
  require(g.cols() == 1 && g.rows() == v.rows(), "gate_rows: gate length does not match rows");
  Tensor out = v;
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) out(i, j) = g(i, 0) * v(i, j);
  return out;
}

Tensor apply_orthogonal(const Orthogonal3& r, const Tensor& v) {
  require(v.cols() == 3 || v.empty(), "apply_orthogonal: vector channels must have 3 columns");
  const Tensor& m = r.matrix();
  Tensor out(v.rows(), v.cols());
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < 3; ++j)
      out(i, j) = m(j, 0) * v(i, 0) + m(j, 1) * v(i, 1) + m(j, 2) * v(i, 2);
  return out;
}

Orthogonal3 random_orthogonal(std::uint64_t seed, bool allow_reflection) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor m(3, 3);
  // Modified Gram-Schmidt on columns, run twice so the orthogonality
  // invariant holds even for ill-conditioned draws. Regenerate in the
  // (measure-zero, but seeded) event of near-singularity.
  auto gram_schmidt = [&m]() {
    for (int c = 0; c < 3; ++c) {
      for (int p = 0; p < c; ++p) {
        double dot = 0.0;
        for (int r = 0; r < 3; ++r) dot += m(r, c) * m(r, p);
        for (int r = 0; r < 3; ++r) m(r, c) -= dot * m(r, p);
      }
      double norm = 0.0;
      for (int r = 0; r < 3; ++r) norm += m(r, c) * m(r, c);
      norm = std::sqrt(norm);
      if (norm < 1e-6) return false;
      for (int r = 0; r < 3; ++r) m(r, c) /= norm;
    }
    return true;
  };
  for (;;) {
    for (double& x : m.flat()) x = gauss(rng);
    if (gram_schmidt() && gram_schmidt()) break;
  }
  if (!allow_reflection && det3(m) < 0.0) {
    for (int r = 0; r < 3; ++r) m(r, 2) = -m(r, 2);
  }
  return Orthogonal3(std::move(m));
}

}  // namespace gvpnn
