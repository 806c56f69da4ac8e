// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "prism/errors.hpp"
#include "prism/filterbank.hpp"
#include "prism/gradcheck.hpp"

using namespace prism;

namespace {

std::vector<double> expand(std::vector<double> half, std::size_t k) {
  return expand_symmetric<double>(std::span<const double>(half), k);
}

}  // namespace

TEST_CASE("mirror expansion") {
  CHECK(expand({1}, 1) == std::vector<double>{1});
  CHECK(expand({2, 1}, 3) == std::vector<double>{1, 2, 1});
  CHECK(expand({5, 3, 1}, 5) == std::vector<double>{1, 3, 5, 3, 1});
  CHECK_THROWS_AS(expand({1, 2}, 4), ShapeError);
  CHECK_THROWS_AS(expand({1, 2}, 5), ShapeError);
}

TEST_CASE("L2 normalization") {
  const std::vector<double> w{3, 4};
  const auto n = normalize_l2<double>(w, 1e-12);
  CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-12));

  const std::vector<double> zero{0, 0, 0};
  CHECK(normalize_l2<double>(zero, 1e-8) == zero);

  Rng rng(3);
  auto r = rng_normal<double>(rng, 0, 1, {9});
  double sq = 0;
  for (double v : r.data()) sq += v * v;
  for (double& v : r.data()) v *= 2.0 / std::sqrt(sq);
  const auto u = normalize_l2<double>(r.data(), 1e-8);
  double nu = 0;
  for (double v : u) nu += v * v;
  CHECK(std::abs(std::sqrt(nu) - (1.0 - 1e-8 / 2)) < 1e-9);
}

TEST_CASE("normalization backward matches finite differences") {
  Rng rng(11);
  Param<double> w{"w", rng_normal<double>(rng, 0, 1, {7})};
  const auto g = rng_normal<double>(rng, 0, 1, {7});
  auto loss = [&] {
    const auto n = normalize_l2<double>(w.value.data(), 1e-8);
    double s = 0;
    for (std::size_t i = 0; i < n.size(); ++i) s += n[i] * g[i];
    return s;
  };
  const auto num = finite_diff_grad(loss, {&w}, 1e-6);
  const auto ana = normalize_l2_backward<double>(w.value.data(), g.data(), 1e-8);
  CHECK(max_relative_error(Tensor<double>({7}, ana), num[0]) < 1e-6);
}

TEST_CASE("same-length convolution") {
  const std::vector<double> x{1, 2, 3, 4}, box{1, 1, 1};
  CHECK(conv_same<double>(x, box) == std::vector<double>{3, 6, 9, 7});

  const std::vector<double> delta{0, 1, 0};
  CHECK(conv_same<double>(x, delta) == x);

  std::vector<double> impulse(11, 0.0);
  impulse[5] = 1;
  const std::vector<double> w{1, 2, 1};
  const auto y = conv_same<double>(impulse, w);
  CHECK(y == std::vector<double>{0, 0, 0, 0, 1, 2, 1, 0, 0, 0, 0});
}

TEST_CASE("frequency response") {
  const std::vector<double> one{1};
  for (double m : frequency_response(one, 16).magnitude) CHECK(m == doctest::Approx(1.0));

  const std::vector<double> box{1, 1, 1};
  const auto r = frequency_response(box, 32);
  for (std::size_t b = 0; b < 32; ++b) {
    const double w = 2 * std::numbers::pi * static_cast<double>(b) / 32;
    CHECK(r.magnitude[b] == doctest::Approx(std::abs(1 + 2 * std::cos(w))).epsilon(1e-12));
  }

  const std::vector<double> sym{1, 2, 1};
  CHECK(linear_phase_residual(sym, 64) < 1e-9);
  const std::vector<double> asym{1, 2, 3};
  CHECK(linear_phase_residual(asym, 64) > 1e-3);
  CHECK_THROWS_AS(frequency_response(box, 2), ShapeError);
}

TEST_CASE("bank forward matches the naive oracle and mirrors every kernel") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    FilterBankConfig cfg{1 + rng.index(3), {3, 5, 9}, 1 + rng.index(2), trial % 3 != 0, 1e-8};
    FilterBank<double> bank(cfg, rng);
    const std::size_t T = 9 + rng.index(40);
    const auto x = rng_normal<double>(rng, 0, 1, {2, cfg.channels, T});
    std::vector<std::vector<double>> kernels;
    for (std::size_t c = 0; c < cfg.channels; ++c)
      for (std::size_t f = 0; f < bank.num_filters(); ++f) {
        const auto& p = bank.weights(c, f).value.vec();
        kernels.push_back(oracle::kernel_from_weights(p, bank.filters()[f].kernel_size, cfg.symmetric, 1e-8));
        if (cfg.symmetric) {
          const auto k = bank.kernel(c, f);
          for (std::size_t j = 0; j < k.size(); ++j) CHECK(k[j] == k[k.size() - 1 - j]);
        }
      }
    CHECK(bank.forward(x) == oracle::bank_forward(x, kernels, bank.num_filters()));
  }
}

TEST_CASE("bank: identical samples give identical slices, zero grad gives zero grads") {
  Rng rng(4);
  FilterBank<double> bank({2, {3, 5}, 2, true, 1e-8}, rng);
  auto one = rng_normal<double>(rng, 0, 1, {1, 2, 16});
  Tensor<double> two({2, 2, 16});
  for (std::size_t i = 0; i < 32; ++i) two[i] = two[32 + i] = one[i];
  const auto y = bank.forward(two);
  const std::size_t half = y.size() / 2;
  for (std::size_t i = 0; i < half; ++i) CHECK(y[i] == y[half + i]);

  for (auto* p : bank.params()) p->zero_grad();
  const auto gx = bank.backward(Tensor<double>(y.shape()));
  for (double v : gx.data()) CHECK(v == 0.0);
  for (auto* p : bank.params())
    for (double v : p->grad.data()) CHECK(v == 0.0);
}

TEST_CASE("bank backward matches finite differences") {
  for (bool symmetric : {true, false}) {
    Rng rng(8);
    FilterBank<double> bank({2, {3, 5}, 2, symmetric, 1e-8}, rng);
    const auto x = rng_normal<double>(rng, 0, 1, {2, 2, 16});
    const auto g = rng_normal<double>(rng, 0, 1, {2, 2, 4, 16});
    Param<double> xp{"x", x};
    auto loss = [&] {
      const auto y = bank.forward(xp.value);
      double s = 0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * g[i];
      return s;
    };
    auto params = bank.params();
    for (auto* p : params) p->zero_grad();
    (void)loss();
    const auto gx = bank.backward(g);
    auto with_x = params;
    with_x.push_back(&xp);
    const auto num = finite_diff_grad(loss, with_x, 1e-5);
    for (std::size_t i = 0; i < params.size(); ++i) CHECK(max_relative_error(params[i]->grad, num[i]) < 1e-6);
    CHECK(max_relative_error(gx, num.back()) < 1e-6);
  }
}

TEST_CASE("bank config validation") {
  Rng rng(0);
  CHECK_THROWS_AS(FilterBank<double>({1, {4}, 1, true, 1e-8}, rng), ConfigError);
  CHECK_THROWS_AS(FilterBank<double>({1, {5, 3}, 1, true, 1e-8}, rng), ConfigError);
  CHECK_THROWS_AS(FilterBank<double>({1, {}, 1, true, 1e-8}, rng), ConfigError);
  CHECK_THROWS_AS(FilterBank<double>({0, {3}, 1, true, 1e-8}, rng), ConfigError);
  FilterBank<double> bank({1, {3}, 1, true, 1e-8}, rng);
  CHECK_THROWS_AS(bank.forward(Tensor<double>({1, 2, 8})), ShapeError);
}

TEST_CASE("param names are unique and descriptive") {
  Rng rng(0);
  FilterBank<float> bank({2, {3, 5}, 2, true, 1e-8}, rng);
  const auto ps = bank.params();
  CHECK(ps.size() == 8);
  CHECK(ps[0]->name == "filterbank.ch0.k3.f0");
  CHECK(ps[3]->name == "filterbank.ch0.k5.f1");
  CHECK(ps[0]->value.size() == 2);
  CHECK(ps[3]->value.size() == 3);
}
