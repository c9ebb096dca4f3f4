#pragma once

#include <cmath>
#include <functional>

#include "rnco/param_store.hpp"
#include "rnco/tensor.hpp"

namespace rnco {

// Compares reverse-mode gradients of a scalar loss against central finite
// differences, parameter by parameter, and returns the worst relative error.
// Only trainable parameters are checked. Meant to run with Real = double; the
// relative-error denominator is floored at 1e-4 so near-zero gradients are
// compared at an effective absolute tolerance instead of blowing up the ratio.
template <typename Real>
Real grad_check(ParamStore<Real>& params,
                const std::function<Tensor<Real>(ParamStore<Real>&, Tape<Real>*)>& f,
                Real fd_step) {
  params.zero_grads();
  Tape<Real> tape;
  Tensor<Real> loss = f(params, &tape);
  if (loss.size() != 1) throw ShapeError("grad_check: loss must be a scalar");
  if (!std::isfinite(static_cast<double>(loss.item()))) {
    throw NumericError("grad_check: non-finite loss");
  }
  if (loss.requires_grad) {
    loss.gptr()[0] = Real(1);
    tape.backward();
  }

  Real worst = 0;
  for (const auto& name : params.names()) {
    Tensor<Real>& t = params.at(name);
    if (!t.requires_grad) continue;
    for (int i = 0; i < t.size(); ++i) {
      const Real saved = t.ptr()[i];
      t.ptr()[i] = saved + fd_step;
      const Real lp = f(params, nullptr).item();
      t.ptr()[i] = saved - fd_step;
      const Real lm = f(params, nullptr).item();
      t.ptr()[i] = saved;
      const Real fd = (lp - lm) / (Real(2) * fd_step);
      const Real ad = t.gptr()[i];
      const Real denom = std::max({std::abs(ad), std::abs(fd), Real(1e-4)});
      worst = std::max(worst, std::abs(ad - fd) / denom);
    }
  }
  return worst;
}

}  // namespace rnco
