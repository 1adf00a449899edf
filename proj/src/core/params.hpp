#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "tape.hpp"
#include "tensor.hpp"

namespace gvpnn {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Ordered collection of named parameter tensors. Order is the checkpoint
// record order and the gradient-accumulator order.
class ParamStore {
 public:
  int add(std::string name, Tensor value);
  int index_of(const std::string& name) const;  // -1 when absent

  Tensor& at(int i) { return items_[std::size_t(i)].value; }
  const Tensor& at(int i) const { return items_[std::size_t(i)].value; }
  const std::string& name(int i) const { return items_[std::size_t(i)].name; }

  int size() const { return int(items_.size()); }
  std::size_t numel() const;
  const std::vector<NamedTensor>& items() const { return items_; }
  std::vector<NamedTensor>& items() { return items_; }

 private:
  std::vector<NamedTensor> items_;
  std::unordered_map<std::string, int> index_;
};

// Leaf ids for every parameter registered on one tape, in store order.
struct ParamBinding {
  std::vector<ValId> leaves;
};

ParamBinding bind_params(Tape& tape, const ParamStore& params);

// Per-parameter gradients, shape-congruent with the store, zero-initialized.
class Grads {
 public:
  explicit Grads(const ParamStore& params);

  // grads[i] += scale * adjoint(leaf i)
  void accumulate(const std::vector<Tensor>& adjoints, const ParamBinding& binding, double scale);
  void add_scaled(const Grads& other, double scale);
  void set_zero();

  Tensor& operator[](int i) { return g_[std::size_t(i)]; }
  const Tensor& operator[](int i) const { return g_[std::size_t(i)]; }
  int size() const { return int(g_.size()); }

 private:
  std::vector<Tensor> g_;
};

}  // namespace gvpnn
