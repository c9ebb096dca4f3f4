#pragma once

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

// Dense kernels behind the differentiable ops. The rnco::kern entry points
// parallelize over independent output rows with OpenMP; rnco::kern::serial
// holds the plain-loop reference used by tests and tools/bench_kernels. Each
// output element is owned by exactly one thread and accumulated in the same
// index order as the serial version, so the two variants are bit-identical.

namespace rnco::kern {

inline bool run_parallel(long long work) {
#ifdef _OPENMP
  return work >= (1 << 15) && omp_get_max_threads() > 1 && !omp_in_parallel();
#else
  (void)work;
  return false;
#endif
}

namespace serial {

// c[n x m] = a[n x k] * b[m x k]^T
template <typename Real>
void matmul_nt(const Real* a, const Real* b, Real* c, int n, int k, int m, bool accumulate) {
  for (int i = 0; i < n; ++i) {
    const Real* ai = a + static_cast<std::size_t>(i) * k;
    Real* ci = c + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const Real* bj = b + static_cast<std::size_t>(j) * k;
      Real acc = 0;
      for (int r = 0; r < k; ++r) acc += ai[r] * bj[r];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

// c[n x m] = a[n x k] * b[k x m]
template <typename Real>
void matmul_nn(const Real* a, const Real* b, Real* c, int n, int k, int m, bool accumulate) {
  for (int i = 0; i < n; ++i) {
    Real* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate) std::fill(ci, ci + m, Real(0));
    const Real* ai = a + static_cast<std::size_t>(i) * k;
    for (int r = 0; r < k; ++r) {
      const Real air = ai[r];
      const Real* br = b + static_cast<std::size_t>(r) * m;
      for (int j = 0; j < m; ++j) ci[j] += air * br[j];
    }
  }
}

// c[k x m] = a[n x k]^T * b[n x m]
template <typename Real>
void matmul_tn(const Real* a, const Real* b, Real* c, int n, int k, int m, bool accumulate) {
  for (int i = 0; i < k; ++i) {
    Real* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate) std::fill(ci, ci + m, Real(0));
    for (int r = 0; r < n; ++r) {
      const Real ari = a[static_cast<std::size_t>(r) * k + i];
      const Real* br = b + static_cast<std::size_t>(r) * m;
      for (int j = 0; j < m; ++j) ci[j] += ari * br[j];
    }
  }
}

// in-place softmax over each length-m row
template <typename Real>
void softmax_rows(Real* x, int n, int m) {
  for (int i = 0; i < n; ++i) {
    Real* xi = x + static_cast<std::size_t>(i) * m;
    Real mx = xi[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, xi[j]);
    Real sum = 0;
    for (int j = 0; j < m; ++j) {
      xi[j] = std::exp(xi[j] - mx);
      sum += xi[j];
    }
    const Real inv = Real(1) / sum;
    for (int j = 0; j < m; ++j) xi[j] *= inv;
  }
}

}  // namespace serial

template <typename Real>
void matmul_nt(const Real* a, const Real* b, Real* c, int n, int k, int m, bool accumulate) {
#pragma omp parallel for schedule(static) if (run_parallel(1LL * n * k * m))
  for (int i = 0; i < n; ++i) {
    const Real* ai = a + static_cast<std::size_t>(i) * k;
    Real* ci = c + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const Real* bj = b + static_cast<std::size_t>(j) * k;
      Real acc = 0;
      for (int r = 0; r < k; ++r) acc += ai[r] * bj[r];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

template <typename Real>
void matmul_nn(const Real* a, const Real* b, Real* c, int n, int k, int m, bool accumulate) {
#pragma omp parallel for schedule(static) if (run_parallel(1LL * n * k * m))
  for (int i = 0; i < n; ++i) {
    Real* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate) std::fill(ci, ci + m, Real(0));
    const Real* ai = a + static_cast<std::size_t>(i) * k;
    for (int r = 0; r < k; ++r) {
      const Real air = ai[r];
      const Real* br = b + static_cast<std::size_t>(r) * m;
      for (int j = 0; j < m; ++j) ci[j] += air * br[j];
    }
  }
}

template <typename Real>
void matmul_tn(const Real* a, const Real* b, Real* c, int n, int k, int m, bool accumulate) {
#pragma omp parallel for schedule(static) if (run_parallel(1LL * n * k * m))
  for (int i = 0; i < k; ++i) {
    Real* ci = c + static_cast<std::size_t>(i) * m;
    if (!accumulate) std::fill(ci, ci + m, Real(0));
    for (int r = 0; r < n; ++r) {
      const Real ari = a[static_cast<std::size_t>(r) * k + i];
      const Real* br = b + static_cast<std::size_t>(r) * m;
      for (int j = 0; j < m; ++j) ci[j] += ari * br[j];
    }
  }
}

template <typename Real>
void softmax_rows(Real* x, int n, int m) {
#pragma omp parallel for schedule(static) if (run_parallel(8LL * n * m))
  for (int i = 0; i < n; ++i) {
    Real* xi = x + static_cast<std::size_t>(i) * m;
    Real mx = xi[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, xi[j]);
    Real sum = 0;
    for (int j = 0; j < m; ++j) {
      xi[j] = std::exp(xi[j] - mx);
      sum += xi[j];
    }
    const Real inv = Real(1) / sum;
    for (int j = 0; j < m; ++j) xi[j] *= inv;
  }
}

}  // namespace rnco::kern
