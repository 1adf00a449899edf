#pragma once

#include <cstdint>

#include "tensor.hpp"

namespace gvpnn {

inline constexpr double kSafeNormEps = 1e-8;

// Paired scalar channels (n x 1) and geometric vector channels (nu x 3).
// Either side may be empty. All model embeddings are values of this type.
struct SvTuple {
  Tensor s;
  Tensor V;

  SvTuple() = default;
  SvTuple(Tensor scalars, Tensor vectors);

  int n() const { return s.rows(); }
  int nu() const { return V.rows(); }
};

// 3x3 orthogonal transform (rotation or rotoreflection). Validated on
// construction: m^T m = I and |det| = 1, both within 1e-12.
class Orthogonal3 {
 public:
  explicit Orthogonal3(Tensor m);
  static Orthogonal3 identity();

  const Tensor& matrix() const { return m_; }
  double det() const;

 private:
  Tensor m_;
};

// Smoothed row-wise norms: out[i] = sqrt(sum_j V[i][j]^2 + eps^2). Strictly
// positive and differentiable everywhere; the norm of a zero row reports eps.
Tensor row_norms(const Tensor& v, double eps = kSafeNormEps);

// W (a x b) applied to vector channels V (b x 3).
Tensor lin_map_vectors(const Tensor& w, const Tensor& v);

// Row i of the output is g[i] times row i of V.
Tensor gate_rows(const Tensor& g, const Tensor& v);

// Each row v becomes R v, i.e. V R^T.
Tensor apply_orthogonal(const Orthogonal3& r, const Tensor& v);

// Deterministic random orthogonal matrix: Gram-Schmidt of a seeded Gaussian
// 3x3. With allow_reflection both determinant signs occur; otherwise det = +1.
Orthogonal3 random_orthogonal(std::uint64_t seed, bool allow_reflection);

}  // namespace gvpnn
