#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fjd/diagnostics.hpp"
#include "fjd/evolve.hpp"
#include "fjd/generator.hpp"
#include "test_support.hpp"

using namespace fjd;
using fjd::test::random_family;

namespace {

// Independent generator: explicit sums over all index tuples, no FFT and no GEMM.
Family<double> brute_generator(const Family<double>& k, const JumpKernel<double>& a) {
  const GridSpec& g = k.grid();
  const double hd = g.cell_volume();
  Family<double> out(g, k.order());
  std::vector<Index> y;
  for (int n = 1; n <= k.order(); ++n) {
    detail::for_each_tuple(g.sites(), n, [&](Index flat, std::span<const Index> x) {
      double v = -a.alpha() * n * k.component(n)(flat);
      for (int i = 0; i < n; ++i) {
        y.assign(x.begin(), x.end());
        for (Index s = 0; s < g.sites(); ++s) {
          y[static_cast<std::size_t>(i)] = s;
          v += hd * a.values()(g.difference(x[static_cast<std::size_t>(i)], s)) * k.at(y);
        }
      }
      out.component(n)(flat) = v;
    });
  }
  return out;
}

JumpKernel<double> random_kernel(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::VectorXd t(g.sites());
  for (Index i = 0; i < t.size(); ++i) t(i) = u(rng);
  return JumpKernel<double>(g, t);
}

}  // namespace

TEST_CASE("uniform ball kernel: total rate and support") {
  const GridSpec grid(2, 16, 0.25);
  const double radius = 0.6;
  const auto a = make_kernel(BallShape{radius}, 1.5, grid);
  CHECK(a.alpha() == doctest::Approx(1.5).epsilon(1e-14));
  int inside = 0;
  for (Index s = 0; s < grid.sites(); ++s) {
    const auto c = grid.coords(s);
    const double dx = (c[0] <= 8 ? c[0] : c[0] - 16) * 0.25, dy = (c[1] <= 8 ? c[1] : c[1] - 16) * 0.25;
    const bool in = std::hypot(dx, dy) <= radius;
    inside += in;
    CHECK((a.values()(s) > 0) == in);
  }
  CHECK(a.values().maxCoeff() == doctest::Approx(1.5 / (inside * grid.cell_volume())));
  CHECK(a.values().minCoeff() == 0.0);
}

TEST_CASE("gaussian kernel multiplier: value at the origin, real, maximal at zero") {
  const GridSpec grid(1, 64, 0.25);
  const auto a = make_kernel(GaussianShape{1.0}, 2.0, grid);
  CHECK(a.multiplier()(0).real() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a.multiplier().imag().cwiseAbs().maxCoeff() < 1e-14);
  for (Index i = 1; i < grid.sites(); ++i) CHECK(a.symbol()(i) < a.symbol()(0));
}

TEST_CASE("multiplier agrees with an explicit discrete Fourier sum") {
  const GridSpec grid(2, 6, 0.4);
  std::mt19937_64 rng(21);
  const auto a = random_kernel(grid, rng);
  for (Index xi = 0; xi < grid.sites(); ++xi) {
    const auto q = grid.coords(xi);
    std::complex<double> sum = 0.0;
    for (Index s = 0; s < grid.sites(); ++s) {
      const auto c = grid.coords(s);
      const double phase = -2.0 * std::numbers::pi * (q[0] * c[0] + q[1] * c[1]) / 6.0;
      sum += a.values()(s) * std::polar(1.0, phase);
    }
    sum *= grid.cell_volume();
    CHECK(std::abs(sum - a.multiplier()(xi)) < 1e-13);
  }
}

TEST_CASE("kernel construction rejects aliasing and bad tables") {
  const GridSpec grid(1, 32, 0.25);  // box 8
  CHECK_THROWS_AS(make_kernel(GaussianShape{1.5}, 1.0, grid), AliasingError);
  CHECK_NOTHROW(make_kernel(GaussianShape{1.3}, 1.0, grid));
  CHECK_THROWS_AS(make_kernel(BallShape{4.5}, 1.0, grid), AliasingError);
  CHECK_THROWS_AS(make_kernel(GaussianShape{1.0}, 0.0, grid), InvalidInput);
  CHECK_THROWS_AS(make_kernel(TableShape{std::vector<double>(32, 0.0)}, 1.0, grid), InvalidInput);
  std::vector<double> neg(32, 1.0);
  neg[3] = -1.0;
  CHECK_THROWS_AS(make_kernel(TableShape{neg}, 1.0, grid), InvalidInput);
}

TEST_CASE("asymmetric tables are symmetrized") {
  const GridSpec grid(1, 8, 1.0);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(8);
  t(1) = 2.0;
  const JumpKernel<double> a(grid, t);
  CHECK(a.values()(1) == 1.0);
  CHECK(a.values()(7) == 1.0);
  CHECK(a.alpha() == 2.0);
  CHECK(a.multiplier().imag().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("generator matches the brute-force oracle on both convolution paths") {
  std::mt19937_64 rng(22);
  for (const GridSpec& grid : {GridSpec(1, 8, 0.5), GridSpec(2, 4, 0.7)}) {
    const auto a = random_kernel(grid, rng);
    const auto k = random_family(grid, 3, rng);
    const auto ref = brute_generator(k, a);
    CHECK(sup_distance(apply_generator(k, a, ConvolutionPath::Spectral), ref) < 1e-12);
    CHECK(sup_distance(apply_generator(k, a, ConvolutionPath::Direct), ref) < 1e-12);
  }
}

TEST_CASE("spectral and direct convolution agree at production size") {
  std::mt19937_64 rng(23);
  const GridSpec grid(1, 32, 0.25);
  const auto a = make_kernel(GaussianShape{0.8}, 1.0, grid);
  const auto k = random_family(grid, 3, rng);
  const auto s = apply_generator(k, a, ConvolutionPath::Spectral);
  const auto d = apply_generator(k, a, ConvolutionPath::Direct);
  CHECK(sup_distance(s, d) <= 1e-10 * std::max(1.0, s.max_abs()));
}

TEST_CASE("generator annihilates homogeneous Poisson families") {
  const GridSpec grid(2, 8, 0.5);
  const auto a = make_kernel(GaussianShape{0.5}, 1.0, grid);
  for (double kappa : {0.2, 1.0, 3.0}) {
    const auto k = poisson_family<double>(grid, kappa, 3);
    CHECK(apply_generator(k, a).max_abs() < 1e-12 * std::pow(kappa, 3));
  }
}

TEST_CASE("generator on a point mass gives the kernel profile") {
  const GridSpec grid(1, 16, 0.5);
  const auto a = make_kernel(GaussianShape{0.7}, 1.0, grid);
  Family<double> k(grid, 1);
  k.at({5}) = 1.0;
  const auto lk = apply_generator(k, a);
  for (Index x = 0; x < 16; ++x) {
    const double expect = 0.5 * a.values()(grid.difference(x, 5)) - (x == 5 ? 1.0 : 0.0);
    CHECK(lk.at({x}) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("generator is order-diagonal") {
  std::mt19937_64 rng(24);
  const GridSpec grid(1, 6, 0.5);
  const auto a = random_kernel(grid, rng);
  const auto k = random_family(grid, 4, rng);
  const auto base = apply_generator(k, a);
  for (int m = 0; m <= 4; ++m) {
    auto p = k;
    p.component(m) += test::random_density(p.component(m).size(), rng, -1, 1);
    const auto lp = apply_generator(p, a);
    for (int n = 0; n <= 4; ++n)
      if (n != m) CHECK((lp.component(n) - base.component(n)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("generator conserves every component's mass") {
  std::mt19937_64 rng(25);
  const GridSpec grid(2, 5, 0.3);
  const auto a = random_kernel(grid, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = random_family(grid, 3, rng);
    const auto lv = apply_generator(v, a);
    for (int n = 1; n <= 3; ++n)
      CHECK(std::abs(lv.component(n).sum()) < 1e-11 * (1 + v.component(n).cwiseAbs().sum()));
    CHECK(std::abs(mass_functionals(lv, 0.4).phi) < 1e-11);
  }
}

TEST_CASE("B part is dominated by A part, with equality for nonnegative v") {
  std::mt19937_64 rng(26);
  const GridSpec grid(1, 12, 0.5);
  const auto a = random_kernel(grid, rng);
  std::uniform_real_distribution<double> th(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double theta = th(rng);
    const auto signed_v = random_family(grid, 3, rng);
    for (auto path : {ConvolutionPath::Spectral, ConvolutionPath::Direct}) {
      const auto c = b_dominated_by_a_check(signed_v, a, theta, path);
      CHECK(c.ok);
    }
    const auto pos = random_family(grid, 3, rng, 0, 1);
    const auto c = b_dominated_by_a_check(pos, a, theta);
    CHECK(c.lhs == doctest::Approx(c.rhs).epsilon(1e-12));
    // ||A v|| = alpha * phi_beta for nonnegative v.
    CHECK(c.rhs == doctest::Approx(a.alpha() * mass_functionals(pos, theta).phi_beta).epsilon(1e-12));
  }
}

TEST_CASE("power bound holds for random families") {
  std::mt19937_64 rng(27);
  const GridSpec grid(1, 8, 0.5);
  const auto a = random_kernel(grid, rng);
  std::uniform_real_distribution<double> th(-1.0, 1.0), gap(0.05, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double tp = th(rng), t = tp + gap(rng);
    const auto v = random_family(grid, 3, rng);
    for (int n = 1; n <= 4; ++n) {
      const auto c = power_bound_check(v, a, n, tp, t);
      CHECK(c.ok);
      CHECK(c.lhs <= c.rhs * (1 + 1e-9));
    }
  }
  CHECK_THROWS_AS(power_bound_check(random_family(grid, 2, rng), a, 1, 0.5, 0.5), InvalidInput);
}

TEST_CASE("sub-Poissonian constant") {
  const GridSpec grid(1, 6, 0.5);
  CHECK(sub_poissonian_constant(poisson_family<double>(grid, 0.7, 4)) == doctest::Approx(0.7));
  auto k = poisson_family<double>(grid, 0.5, 2);
  k.at({1, 2}) = 0.64;
  CHECK(sub_poissonian_constant(k) == doctest::Approx(0.8));
  k.at({1, 3}) = -0.1;
  CHECK_THROWS_AS(sub_poissonian_constant(k), InvalidInput);
  k.at({1, 3}) = -1e-14;
  CHECK_NOTHROW(sub_poissonian_constant(k));
  CHECK_THROWS_AS(sub_poissonian_constant(Family<double>(grid, 0)), InvalidInput);
}

TEST_CASE("grid mismatches are rejected") {
  const auto a = make_kernel(GaussianShape{0.5}, 1.0, GridSpec(1, 16, 0.5));
  const Family<double> k(GridSpec(1, 16, 0.25), 2);
  CHECK_THROWS_AS(apply_generator(k, a), GridMismatch);
}
