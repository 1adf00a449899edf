#include "tensor.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace gvpnn {

Tensor::Tensor(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == std::size_t(rows) * cols, "tensor: data length does not match shape");
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t(int(rows.size()), rows.size() ? int(rows.begin()->size()) : 0);
  int r = 0;
  for (const auto& row : rows) {
    require(int(row.size()) == t.cols_, "tensor: ragged initializer");
    int c = 0;
    for (double x : row) t(r, c++) = x;
    ++r;
  }
  return t;
}

Tensor Tensor::column(std::span<const double> xs) {
  Tensor t(int(xs.size()), 1);
  std::copy(xs.begin(), xs.end(), t.data_.begin());
  return t;
}

Tensor Tensor::scalar(double x) {
  Tensor t(1, 1);
  t(0, 0) = x;
  return t;
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions disagree");
  Tensor c(a.rows(), b.cols());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const double* bd = b.data();
  if (n == 1) {
    for (int i = 0; i < m; ++i) {
      const double* ai = a.data() + std::size_t(i) * k;
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += ai[p] * bd[p];
      c.data()[i] = s;
    }
  } else if (n == 3) {
    for (int i = 0; i < m; ++i) {
      const double* ai = a.data() + std::size_t(i) * k;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (int p = 0; p < k; ++p) {
        const double aip = ai[p];
        s0 += aip * bd[3 * p];
        s1 += aip * bd[3 * p + 1];
        s2 += aip * bd[3 * p + 2];
      }
      double* ci = c.data() + std::size_t(i) * 3;
      ci[0] = s0;
      ci[1] = s1;
      ci[2] = s2;
    }
  } else {
    for (int i = 0; i < m; ++i) {
      double* ci = c.data() + std::size_t(i) * n;
      const double* ai = a.data() + std::size_t(i) * k;
      for (int p = 0; p < k; ++p) {
        const double aip = ai[p];
        const double* bp = bd + std::size_t(p) * n;
        for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
      }
    }
  }
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), "add: shapes disagree");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Tensor scaled(const Tensor& a, double c) {
  Tensor out = a;
  for (double& x : out.flat()) x *= c;
  return out;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  require(a.cols() == b.cols(), "concat_rows: column counts disagree");
  Tensor c(a.rows() + b.rows(), a.cols());
  std::copy(a.flat().begin(), a.flat().end(), c.data());
  std::copy(b.flat().begin(), b.flat().end(), c.data() + a.size());
  return c;
}

double dot_flat(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), "dot_flat: shapes disagree");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double x : a.flat()) m = std::max(m, std::fabs(x));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.same_shape(b), "max_abs_diff: shapes disagree");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace gvpnn
