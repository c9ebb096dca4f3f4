#pragma once

#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "rnco/error.hpp"

namespace rnco {

// Dense row-major tensor. Data and gradient buffers are shared_ptr-backed, so
// copying a Tensor aliases the same storage (cheap to capture in backward
// closures). `requires_grad` marks tensors that gradient flows into; frozen
// parameters keep their gradient slot but are skipped by backward passes.
template <typename Real>
struct Tensor {
  std::vector<int> shape;
  std::shared_ptr<std::vector<Real>> data;
  std::shared_ptr<std::vector<Real>> grad;
  bool requires_grad = false;

  Tensor() = default;

  static Tensor zeros(std::vector<int> s) {
    Tensor t;
    t.shape = std::move(s);
    t.data = std::make_shared<std::vector<Real>>(static_cast<std::size_t>(numel(t.shape)), Real(0));
    return t;
  }

  static Tensor from(std::vector<int> s, std::vector<Real> values) {
    if (static_cast<long long>(values.size()) != numel(s)) {
      throw ShapeError("tensor: value count does not match shape");
    }
    Tensor t;
    t.shape = std::move(s);
    t.data = std::make_shared<std::vector<Real>>(std::move(values));
    return t;
  }

  static Tensor scalar(Real v) { return from({1}, {v}); }

  static long long numel(const std::vector<int>& s) {
    long long n = 1;
    for (int d : s) {
      if (d < 0) throw ShapeError("tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  int size() const { return static_cast<int>(data ? data->size() : 0); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  Real* ptr() { return data->data(); }
  const Real* ptr() const { return data->data(); }
  // Gradient buffers are written through const handles (backward closures
  // capture tensors by value); the buffer itself is shared, not owned per copy.
  Real* gptr() const { return grad->data(); }

  Real item() const {
    if (size() != 1) throw ShapeError("tensor: item() on non-scalar");
    return (*data)[0];
  }

  void ensure_grad() {
    if (!grad) grad = std::make_shared<std::vector<Real>>(data->size(), Real(0));
  }

  void zero_grad() {
    if (grad) std::fill(grad->begin(), grad->end(), Real(0));
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Reverse-mode tape. Ops append a backward closure as they execute; running
// backward() replays them in reverse construction order, which is a valid
// topological order of the recorded graph.
template <typename Real>
class Tape {
 public:
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

  void backward() {
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  }

  std::size_t size() const { return ops_.size(); }
  void clear() { ops_.clear(); }

 private:
  std::vector<std::function<void()>> ops_;
};

}  // namespace rnco
