#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rnco/rng.hpp"
#include "rnco/tensor.hpp"

namespace rnco {

// Named parameter tensors with one gradient slot each. Iteration follows
// insertion order everywhere (updates, gradient reduction, checkpointing), so
// runs are reproducible. A shadow() store shares parameter data but owns fresh
// gradient buffers; per-sample shadows let batch members backpropagate in
// parallel, with the reduction into the master done serially in sample order.
template <typename Real>
class ParamStore {
 public:
  Tensor<Real>& add(const std::string& name, Tensor<Real> t) {
    if (map_.count(name)) throw ContractError("param store: duplicate name " + name);
    t.ensure_grad();
    t.requires_grad = true;
    order_.push_back(name);
    return map_.emplace(name, std::move(t)).first->second;
  }

  Tensor<Real>& at(const std::string& name) {
    auto it = map_.find(name);
    if (it == map_.end()) throw ContractError("param store: unknown name " + name);
    return it->second;
  }

  const Tensor<Real>& at(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end()) throw ContractError("param store: unknown name " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return map_.count(name) != 0; }
  const std::vector<std::string>& names() const { return order_; }

  std::vector<std::string> names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& n : order_) {
      if (n.rfind(prefix, 0) == 0) out.push_back(n);
    }
    return out;
  }

  void set_trainable(const std::string& prefix, bool on) {
    for (auto& n : order_) {
      if (n.rfind(prefix, 0) == 0) map_.at(n).requires_grad = on;
    }
  }

  void zero_grads() {
    for (auto& n : order_) map_.at(n).zero_grad();
  }

  long long total_size() const {
    long long s = 0;
    for (const auto& n : order_) s += map_.at(n).size();
    return s;
  }

  ParamStore shadow() const {
    ParamStore s;
    s.order_ = order_;
    for (const auto& n : order_) {
      Tensor<Real> t = map_.at(n);  // aliases data
      t.grad = std::make_shared<std::vector<Real>>(t.data->size(), Real(0));
      s.map_.emplace(n, std::move(t));
    }
    return s;
  }

  // master_grad += scale * other_grad, over trainable entries
  void accumulate_grads_from(const ParamStore& other, Real scale) {
    for (const auto& n : order_) {
      Tensor<Real>& t = map_.at(n);
      if (!t.requires_grad) continue;
      const Tensor<Real>& o = other.at(n);
      Real* g = t.gptr();
      const Real* og = o.gptr();
      const int sz = t.size();
      for (int i = 0; i < sz; ++i) g[i] += scale * og[i];
    }
  }

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor<Real>> map_;
};

// Glorot-uniform matrix [rows x cols]; fan_out = rows, fan_in = cols.
template <typename Real>
Tensor<Real> glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::vector<Real> v(static_cast<std::size_t>(rows) * cols);
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-limit, limit));
  return Tensor<Real>::from({rows, cols}, std::move(v));
}

// Embedding-style vector init, uniform with variance 1/dim.
template <typename Real>
Tensor<Real> embedding_uniform(int dim, Rng& rng) {
  const double limit = std::sqrt(3.0 / dim);
  std::vector<Real> v(dim);
  for (auto& x : v) x = static_cast<Real>(rng.uniform(-limit, limit));
  return Tensor<Real>::from({dim}, std::move(v));
}

}  // namespace rnco
