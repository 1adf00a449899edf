#include "params.hpp"

#include "error.hpp"

namespace gvpnn {

int ParamStore::add(std::string name, Tensor value) {
  require(index_.find(name) == index_.end(), "ParamStore: duplicate name " + name);
  int id = int(items_.size());
  index_.emplace(name, id);
  items_.push_back({std::move(name), std::move(value)});
  return id;
}

int ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

std::size_t ParamStore::numel() const {
  std::size_t n = 0;
  for (const auto& item : items_) n += item.value.size();
  return n;
}

ParamBinding bind_params(Tape& tape, const ParamStore& params) {
  ParamBinding binding;
  binding.leaves.reserve(std::size_t(params.size()));
  for (int i = 0; i < params.size(); ++i) binding.leaves.push_back(tape.leaf(params.at(i), true));
  return binding;
}

Grads::Grads(const ParamStore& params) {
  g_.reserve(std::size_t(params.size()));
  for (int i = 0; i < params.size(); ++i)
    g_.emplace_back(params.at(i).rows(), params.at(i).cols());
}

void Grads::accumulate(const std::vector<Tensor>& adjoints, const ParamBinding& binding,
                       double scale) {
  require(binding.leaves.size() == g_.size(), "Grads: binding size mismatch");
  for (std::size_t i = 0; i < g_.size(); ++i) {
    const Tensor& a = adjoints[std::size_t(binding.leaves[i])];
    if (a.empty()) continue;
    for (std::size_t k = 0; k < g_[i].size(); ++k) g_[i].data()[k] += scale * a.data()[k];
  }
}

void Grads::add_scaled(const Grads& other, double scale) {
  require(other.g_.size() == g_.size(), "Grads: size mismatch");
  for (std::size_t i = 0; i < g_.size(); ++i)
    for (std::size_t k = 0; k < g_[i].size(); ++k)
      g_[i].data()[k] += scale * other.g_[i].data()[k];
}

void Grads::set_zero() {
  for (auto& t : g_)
    for (double& x : t.flat()) x = 0.0;
}

}  // namespace gvpnn
