#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rnco/kernels.hpp"
#include "rnco/rng.hpp"

using rnco::Rng;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// independent triple-loop oracle, plain i/j/r order
std::vector<double> naive_nt(const std::vector<double>& a, const std::vector<double>& b, int n,
                             int k, int m) {
  std::vector<double> c(static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int r = 0; r < k; ++r) c[i * m + j] += a[i * k + r] * b[j * k + r];
  return c;
}

}  // namespace

TEST_CASE("matmul_nt matches a naive scalar loop") {
  Rng rng(11);
  const int n = 7, k = 13, m = 5;
  auto a = random_vec(static_cast<std::size_t>(n) * k, rng);
  auto b = random_vec(static_cast<std::size_t>(m) * k, rng);
  std::vector<double> c(static_cast<std::size_t>(n) * m);
  rnco::kern::matmul_nt(a.data(), b.data(), c.data(), n, k, m, false);
  auto ref = naive_nt(a, b, n, k, m);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
  Rng rng(42);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = rng.uniform_int(1, 200);
    const int k = rng.uniform_int(1, 96);
    const int m = rng.uniform_int(1, 96);
    auto a = random_vec(static_cast<std::size_t>(n) * k, rng);
    auto b_nt = random_vec(static_cast<std::size_t>(m) * k, rng);
    auto b_nn = random_vec(static_cast<std::size_t>(k) * m, rng);
    auto b_tn = random_vec(static_cast<std::size_t>(n) * m, rng);

    std::vector<double> c1(static_cast<std::size_t>(n) * m), c2(c1.size());
    rnco::kern::matmul_nt(a.data(), b_nt.data(), c1.data(), n, k, m, false);
    rnco::kern::serial::matmul_nt(a.data(), b_nt.data(), c2.data(), n, k, m, false);
    CHECK(c1 == c2);

    rnco::kern::matmul_nn(a.data(), b_nn.data(), c1.data(), n, k, m, false);
    rnco::kern::serial::matmul_nn(a.data(), b_nn.data(), c2.data(), n, k, m, false);
    CHECK(c1 == c2);

    std::vector<double> t1(static_cast<std::size_t>(k) * m), t2(t1.size());
    rnco::kern::matmul_tn(a.data(), b_tn.data(), t1.data(), n, k, m, false);
    rnco::kern::serial::matmul_tn(a.data(), b_tn.data(), t2.data(), n, k, m, false);
    CHECK(t1 == t2);

    auto s1 = random_vec(static_cast<std::size_t>(n) * m, rng);
    auto s2 = s1;
    rnco::kern::softmax_rows(s1.data(), n, m);
    rnco::kern::serial::softmax_rows(s2.data(), n, m);
    CHECK(s1 == s2);
  }
}

TEST_CASE("accumulate variant adds onto existing output") {
  Rng rng(7);
  const int n = 4, k = 6, m = 3;
  auto a = random_vec(static_cast<std::size_t>(n) * k, rng);
  auto b = random_vec(static_cast<std::size_t>(m) * k, rng);
  std::vector<double> base(static_cast<std::size_t>(n) * m, 0.5);
  auto c = base;
  rnco::kern::matmul_nt(a.data(), b.data(), c.data(), n, k, m, true);
  auto ref = naive_nt(a, b, n, k, m);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i] == doctest::Approx(base[i] + ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("softmax rows are normalized and positive where finite") {
  Rng rng(3);
  const int n = 9, m = 17;
  auto x = random_vec(static_cast<std::size_t>(n) * m, rng);
  for (auto& v : x) v *= 30.0;  // widen the range to stress normalization
  rnco::kern::softmax_rows(x.data(), n, m);
  for (int i = 0; i < n; ++i) {
    double sum = 0;
    for (int j = 0; j < m; ++j) {
      CHECK(x[i * m + j] >= 0.0);
      sum += x[i * m + j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}
