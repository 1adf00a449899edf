#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gvpnn {

// Dense row-major matrix of doubles. Channel vectors are stored as rows x 1
// columns; geometric vector channels as nu x 3 with one vector per row.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols, 0.0) {}
  Tensor(int rows, int cols, std::vector<double> data);

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor column(std::span<const double> xs);
  static Tensor scalar(double x);
  static Tensor identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[std::size_t(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// C = A * B, shapes (a x b) (b x c). Throws on inner-dimension mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise sum; shapes must agree.
Tensor add(const Tensor& a, const Tensor& b);

Tensor scaled(const Tensor& a, double c);

// Stacks b below a; column counts must agree. Either side may be empty.
Tensor concat_rows(const Tensor& a, const Tensor& b);

double dot_flat(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace gvpnn
