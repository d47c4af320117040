#include <doctest.h>

#include <cmath>

#include "fjd/diagnostics.hpp"
#include "fjd/evolve.hpp"
#include "test_support.hpp"

using namespace fjd;

namespace {

// exp(t G) for the one-particle generator G = h^d C_a - alpha I, by scaling and
// squaring of a Taylor series; independent of the FFT route.
Eigen::MatrixXd taylor_propagator(const JumpKernel<double>& a, double t) {
  const GridSpec& g = a.grid();
  const Index s = g.sites();
  Eigen::MatrixXd gen(s, s);
  for (Index x = 0; x < s; ++x)
    for (Index y = 0; y < s; ++y)
      gen(x, y) = g.cell_volume() * a.values()(g.difference(x, y)) - (x == y ? a.alpha() : 0.0);
  int squarings = 0;
  double scale = t * 2.0 * a.alpha();
  while (scale > 0.25) {
    scale /= 2;
    ++squarings;
  }
  const Eigen::MatrixXd m = gen * (t / std::pow(2.0, squarings));
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(s, s), sum = term;
  for (int j = 1; j <= 30; ++j) {
    term = term * m / j;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Eigen::VectorXd bump(const GridSpec& g, double base, double amp, double width) {
  Eigen::VectorXd r(g.sites());
  for (Index i = 0; i < g.sites(); ++i) {
    const double x = (i + 0.5) * g.spacing() - g.extent() / 2;
    r(i) = base + amp * std::exp(-x * x / (2 * width * width));
  }
  return r;
}

struct Setup {
  GridSpec grid{1, 32, 1.0 / 32};
  JumpKernel<double> a = make_kernel(GaussianShape{0.1}, 2.0, grid);
};

}  // namespace

TEST_CASE("horizon zero returns the initial state unchanged") {
  Setup s;
  std::mt19937_64 rng(31);
  const HierarchyState<double> k0{0.5, test::random_family(s.grid, 3, rng), 0.2};
  for (auto basis : {Rk4Basis::Fourier, Rk4Basis::Physical}) {
    Rk4Options o;
    o.basis = basis;
    const auto out = evolve_rk4(k0, s.a, 0.0, 1e-3, o);
    CHECK(out.time == 0.5);
    for (int n = 0; n <= 3; ++n) CHECK((out.family.component(n).array() == k0.family.component(n).array()).all());
  }
  const auto ex = exact_propagate(k0, s.a, 0.0);
  CHECK(sup_distance(ex.family, k0.family) == 0.0);
}

TEST_CASE("homogeneous Poisson states are stationary") {
  Setup s;
  for (double kappa : {0.0, 0.7, 2.0}) {
    const HierarchyState<double> k0{0.0, poisson_family<double>(s.grid, kappa, 3), 0.0};
    for (auto basis : {Rk4Basis::Fourier, Rk4Basis::Physical}) {
      Rk4Options o;
      o.basis = basis;
      const auto out = evolve_rk4(k0, s.a, 0.5, 1e-2, o);
      CHECK(sup_distance(out.family, k0.family) <= 1e-12);
    }
    CHECK(sup_distance(exact_propagate(k0, s.a, 3.0).family, k0.family) <= 1e-12);
  }
}

TEST_CASE("one-particle propagator matches a Taylor-series matrix exponential") {
  std::mt19937_64 rng(32);
  for (const GridSpec& g : {GridSpec(1, 16, 0.1), GridSpec(2, 4, 0.5)}) {
    Eigen::VectorXd t(g.sites());
    for (Index i = 0; i < t.size(); ++i) t(i) = std::uniform_real_distribution<double>(0, 1)(rng);
    const JumpKernel<double> a(g, t);
    for (double time : {0.0, 0.3, 2.0}) {
      const auto p = one_particle_propagator(a, time);
      CHECK((p - taylor_propagator(a, time)).cwiseAbs().maxCoeff() < 1e-12);
      // Markov: nonnegative columns summing to one.
      CHECK(p.minCoeff() > -1e-14);
      CHECK((p.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("exact propagation is a semigroup") {
  Setup s;
  std::mt19937_64 rng(33);
  const HierarchyState<double> k0{0.0, test::random_family(s.grid, 2, rng), 0.0};
  const auto direct = exact_propagate(k0, s.a, 0.7);
  const auto split = exact_propagate(exact_propagate(k0, s.a, 0.3), s.a, 0.4);
  CHECK(split.time == doctest::Approx(0.7));
  CHECK(sup_distance(direct.family, split.family) < 1e-13);
}

TEST_CASE("Poisson structure is preserved: k2 stays the product of k1") {
  Setup s;
  const auto rho = bump(s.grid, 0.2, 0.8, 0.05);
  const HierarchyState<double> k0{0.0, poisson_family<double>(s.grid, rho, 3), 0.0};
  const auto ex = exact_propagate(k0, s.a, 1.0);
  const auto rk = evolve_rk4(k0, s.a, 1.0, 1e-2);
  const Eigen::VectorXd rho_t = propagate_density(rho, s.a, 1.0);
  const auto product = poisson_family<double>(s.grid, rho_t, 3);
  CHECK(sup_distance(ex.family, product) < 1e-13);
  CHECK(sup_distance(rk.family, product) < 1e-9);
  CHECK((ex.family.component(1) - rho_t).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("RK4 converges to the exact solution at fourth order") {
  Setup s;
  std::mt19937_64 rng(34);
  const HierarchyState<double> k0{0.0, test::random_family(s.grid, 2, rng, 0, 1), 0.0};
  const auto ex = exact_propagate(k0, s.a, 1.0);
  double prev = 0.0;
  for (double dt : {0.1, 0.05, 0.025}) {
    const double err = sup_distance(evolve_rk4(k0, s.a, 1.0, dt).family, ex.family);
    if (prev > 0) {
      CHECK(prev / err > 12.0);
      CHECK(prev / err < 20.0);
    }
    prev = err;
  }
}

TEST_CASE("Fourier and physical bases agree on both convolution paths") {
  Setup s;
  std::mt19937_64 rng(35);
  const HierarchyState<double> k0{0.0, test::random_family(s.grid, 2, rng), 0.0};
  Rk4Options f;
  Rk4Options p;
  p.basis = Rk4Basis::Physical;
  Rk4Options q = p;
  q.convolution = ConvolutionPath::Direct;
  const auto a = evolve_rk4(k0, s.a, 0.37, 0.02, f);
  const auto b = evolve_rk4(k0, s.a, 0.37, 0.02, p);
  const auto c = evolve_rk4(k0, s.a, 0.37, 0.02, q);
  CHECK(a.time == doctest::Approx(0.37));
  CHECK(sup_distance(a.family, b.family) < 1e-12);
  CHECK(sup_distance(b.family, c.family) < 1e-12);
}

TEST_CASE("shortened final step lands on the horizon") {
  const auto sch = StepSchedule::make(1.0, 0.3);
  CHECK(sch.full == 3);
  CHECK(sch.count() == 4);
  CHECK(sch.last == doctest::Approx(0.1));
  const auto even = StepSchedule::make(1.0, 1e-3);
  CHECK(even.count() == 1000);
  CHECK(even.last == 0.0);
}

TEST_CASE("observer sees snapshots and the final state") {
  Setup s;
  const HierarchyState<double> k0{0.0, poisson_family<double>(s.grid, bump(s.grid, 0.1, 1, 0.1), 2), 0.0};
  for (auto basis : {Rk4Basis::Fourier, Rk4Basis::Physical}) {
    std::vector<double> times;
    std::vector<std::size_t> steps;
    Rk4Options o;
    o.basis = basis;
    o.observe_every = 10;
    o.observer = [&](const HierarchyState<double>& st, std::size_t step) {
      times.push_back(st.time);
      steps.push_back(step);
    };
    const auto out = evolve_rk4(k0, s.a, 0.25, 0.01, o);
    REQUIRE(times.size() == 3);
    CHECK(steps == std::vector<std::size_t>{10, 20, 25});
    CHECK(times[0] == doctest::Approx(0.1));
    CHECK(times[2] == doctest::Approx(0.25));
    CHECK(out.time == doctest::Approx(0.25));
  }
}

TEST_CASE("sup norm does not grow and nonnegativity persists") {
  Setup s;
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const HierarchyState<double> k0{0.0, test::random_family(s.grid, 3, rng, 0, 1), 0.0};
    const auto out = evolve_rk4(k0, s.a, 1.0, 0.01);
    for (double theta : {-1.0, 0.0, 1.0}) CHECK(norm_sup(out.family, theta) <= norm_sup(k0.family, theta) * (1 + 1e-12));
    for (int n = 1; n <= 3; ++n) CHECK(out.family.component(n).minCoeff() >= -1e-9 * out.family.max_abs());
    CHECK(sub_poissonian_constant(out.family) <= sub_poissonian_constant(k0.family) * (1 + 1e-9));
  }
}

TEST_CASE("step guard and divergence reporting") {
  Setup s;
  const HierarchyState<double> k0{0.0, poisson_family<double>(s.grid, bump(s.grid, 0.1, 1, 0.1), 2), 0.0};
  CHECK_THROWS_AS(evolve_rk4(k0, s.a, 1.0, 0.3), InvalidInput);
  CHECK_THROWS_AS(evolve_rk4(k0, s.a, -1.0, 0.01), InvalidInput);
  CHECK_THROWS_AS(evolve_rk4(k0, s.a, 1.0, 0.0), InvalidInput);
  for (auto basis : {Rk4Basis::Fourier, Rk4Basis::Physical}) {
    Rk4Options o;
    o.basis = basis;
    o.max_dt_alpha = 0.0;
    try {
      evolve_rk4(k0, s.a, 2000.0, 10.0, o);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.step() > 1);
      CHECK(e.step() <= 200);
    }
  }
}

TEST_CASE("single-precision instantiation tracks double precision") {
  Setup s;
  const auto af = make_kernel<float>(GaussianShape{0.1}, 2.0f, s.grid);
  const Eigen::VectorXd rho = bump(s.grid, 0.2, 0.8, 0.05);
  const HierarchyState<float> kf{0.0, poisson_family<float>(s.grid, rho.cast<float>(), 2), 0.0};
  const HierarchyState<double> kd{0.0, poisson_family<double>(s.grid, rho, 2), 0.0};
  const auto rf = evolve_rk4(kf, af, 0.5, 0.01);
  const auto rd = evolve_rk4(kd, s.a, 0.5, 0.01);
  for (int n = 1; n <= 2; ++n)
    CHECK((rf.family.component(n).cast<double>() - rd.family.component(n)).cwiseAbs().maxCoeff() < 1e-5);
}
