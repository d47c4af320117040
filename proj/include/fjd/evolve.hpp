#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>

#include "fjd/generator.hpp"
#include "fjd/lebesgue_poisson.hpp"

namespace fjd {

/// Correlation family at a point in time. theta only labels norm reports.
template <typename Scalar>
struct HierarchyState {
  double time = 0.0;
  Family<Scalar> family;
  double theta = 0.0;
};

enum class Rk4Basis {
  Fourier,   ///< generator applied as its diagonal symbol on Fourier coefficients
  Physical,  ///< generator applied on grid values by apply_generator each stage
};

struct Rk4Options {
  Rk4Basis basis = Rk4Basis::Fourier;
  ConvolutionPath convolution = ConvolutionPath::Spectral;  // Physical basis only
  /// Rejects dt * alpha above this bound; <= 0 disables the guard.
  double max_dt_alpha = 0.5;
  /// Invoke the observer every this many steps (0: never). The final state is
  /// always reported.
  std::size_t observe_every = 0;
  std::function<void(const HierarchyState<double>&, std::size_t)> observer;
};

/// Step schedule: `full` steps of dt, then one shortened step if needed.
struct StepSchedule {
  std::size_t full = 0;
  double dt = 0.0;
  double last = 0.0;  // 0 when no shortened step

  std::size_t count() const noexcept { return full + (last > 0.0 ? 1 : 0); }
  double step(std::size_t i) const noexcept { return i < full ? dt : last; }

  static StepSchedule make(double horizon, double dt) {
    StepSchedule s;
    s.dt = dt;
    s.full = static_cast<std::size_t>(std::floor(horizon / dt * (1.0 + 1e-12)));
    const double rem = horizon - static_cast<double>(s.full) * dt;
    s.last = rem > 1e-9 * dt ? rem : 0.0;
    return s;
  }
};

namespace detail {

template <typename Scalar>
void check_rk4_inputs(const HierarchyState<Scalar>& k0, const JumpKernel<Scalar>& a,
                      double horizon, double dt, const Rk4Options& opts) {
  require_same_grid(k0.family.grid(), a.grid(), "evolve_rk4");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidInput("evolve_rk4: T must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("evolve_rk4: dt must be > 0");
  if (opts.max_dt_alpha > 0.0 && dt * double(a.alpha()) > opts.max_dt_alpha * (1.0 + 1e-12))
    throw InvalidInput("evolve_rk4: dt * alpha = " + std::to_string(dt * double(a.alpha())) +
                       " exceeds the stability guard " + std::to_string(opts.max_dt_alpha));
}

template <typename Scalar>
void notify(const Rk4Options& opts, const HierarchyState<Scalar>& s, std::size_t step) {
  if constexpr (std::is_same_v<Scalar, double>) {
    if (opts.observer) opts.observer(s, step);
  }
}

/// Fourier-basis symbol of the order-n generator: sum_i a^(xi_i) - n alpha.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> order_symbol(const JumpKernel<Scalar>& a, int n) {
  const Index s = a.grid().sites();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> lam =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Constant(1, -a.alpha() * Scalar(n));
  for (int i = 0; i < n; ++i) {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> next(lam.size() * s);
    for (Index p = 0; p < lam.size(); ++p)
      next.segment(p * s, s) = lam(p) + a.symbol().array();
    lam.swap(next);
  }
  return lam;
}

template <typename Scalar>
HierarchyState<Scalar> evolve_rk4_fourier(const HierarchyState<Scalar>& k0,
                                          const JumpKernel<Scalar>& a, double horizon,
                                          const StepSchedule& sched, const Rk4Options& opts) {
  using Complex = std::complex<Scalar>;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const GridSpec& grid = k0.family.grid();
  const int d = grid.dimension();
  const int order = k0.family.order();
  AxisFFT<Scalar> fft(grid.sites_per_axis());

  // Fourier coefficients per order, viewed as interleaved (re, im) reals.
  std::vector<std::vector<Complex>> coef(static_cast<std::size_t>(order) + 1);
  std::vector<Array> lam2(static_cast<std::size_t>(order) + 1);
  for (int n = 1; n <= order; ++n) {
    const auto& c = k0.family.component(n);
    auto& z = coef[static_cast<std::size_t>(n)];
    z.assign(c.data(), c.data() + c.size());
    fft.transform_all(z, n * d, false);
    const Array lam = order_symbol(a, n);
    auto& l2 = lam2[static_cast<std::size_t>(n)];
    l2.resize(2 * lam.size());
    for (Index i = 0; i < lam.size(); ++i) l2(2 * i) = l2(2 * i + 1) = lam(i);
  }

  HierarchyState<Scalar> out = k0;
  auto to_physical = [&](HierarchyState<Scalar>& st) {
    std::vector<Complex> buf;
    for (int n = 1; n <= order; ++n) {
      buf = coef[static_cast<std::size_t>(n)];
      fft.transform_all(buf, n * d, true);
      auto& c = st.family.component(n);
      for (Index i = 0; i < c.size(); ++i) c(i) = buf[static_cast<std::size_t>(i)].real();
    }
  };

  constexpr Index kBlock = 2048;
  Array k1(kBlock), k2(kBlock), k3(kBlock), k4(kBlock);
  const std::size_t total = sched.count();
  std::size_t done = 0;
  while (done < total) {
    std::size_t end = total;
    if (opts.observe_every > 0) end = std::min(total, (done / opts.observe_every + 1) * opts.observe_every);
    for (int n = 1; n <= order; ++n) {
      auto& zc = coef[static_cast<std::size_t>(n)];
      const Index len = 2 * static_cast<Index>(zc.size());
      Scalar* raw = reinterpret_cast<Scalar*>(zc.data());
      const Array& l2 = lam2[static_cast<std::size_t>(n)];
      for (Index b = 0; b < len; b += kBlock) {
        const Index m = std::min(kBlock, len - b);
        Eigen::Map<Array> z(raw + b, m);
        const auto l = l2.segment(b, m);
        auto s1 = k1.head(m), s2 = k2.head(m), s3 = k3.head(m), s4 = k4.head(m);
        for (std::size_t st = done; st < end; ++st) {
          const Scalar h = Scalar(sched.step(st));
          s1 = l * z;
          s2 = l * (z + Scalar(0.5) * h * s1);
          s3 = l * (z + Scalar(0.5) * h * s2);
          s4 = l * (z + h * s3);
          z += (h / Scalar(6)) * (s1 + Scalar(2) * s2 + Scalar(2) * s3 + s4);
          if (!z.allFinite())
            throw DivergenceError(st + 1, "evolve_rk4: non-finite value at order " +
                                              std::to_string(n));
        }
      }
    }
    done = end;
    if (done < total && opts.observe_every > 0) {
      out.time = k0.time + sched.dt * static_cast<double>(done);
      to_physical(out);
      notify(opts, out, done);
    }
  }
  to_physical(out);
  out.time = k0.time + horizon;
  return out;
}

template <typename Scalar>
HierarchyState<Scalar> evolve_rk4_physical(const HierarchyState<Scalar>& k0,
                                           const JumpKernel<Scalar>& a, double horizon,
                                           const StepSchedule& sched, const Rk4Options& opts) {
  HierarchyState<Scalar> s = k0;
  auto& k = s.family;
  const auto path = opts.convolution;
  for (std::size_t st = 0; st < sched.count(); ++st) {
    const Scalar h = Scalar(sched.step(st));
    const auto s1 = apply_generator(k, a, path);
    const auto s2 = apply_generator(k + (Scalar(0.5) * h) * s1, a, path);
    const auto s3 = apply_generator(k + (Scalar(0.5) * h) * s2, a, path);
    const auto s4 = apply_generator(k + h * s3, a, path);
    for (int n = 1; n <= k.order(); ++n)
      k.component(n) += (h / Scalar(6)) * (s1.component(n) + Scalar(2) * s2.component(n) +
                                           Scalar(2) * s3.component(n) + s4.component(n));
    if (!k.all_finite()) throw DivergenceError(st + 1, "evolve_rk4: non-finite value");
    s.time = k0.time + sched.dt * static_cast<double>(st + 1);
    if (opts.observe_every > 0 && (st + 1) % opts.observe_every == 0 && st + 1 < sched.count())
      notify(opts, s, st + 1);
  }
  s.time = k0.time + horizon;
  return s;
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta integration of dk/dt = L k over a
/// duration `horizon`; the last step is shortened to land exactly on it.
/// Order 0 is left untouched (the generator annihilates it).
template <typename Scalar>
HierarchyState<Scalar> evolve_rk4(const HierarchyState<Scalar>& k0, const JumpKernel<Scalar>& a,
                                  double horizon, double dt, const Rk4Options& opts = {}) {
  detail::check_rk4_inputs(k0, a, horizon, dt, opts);
  if (horizon == 0.0) return k0;
  if (!k0.family.all_finite()) throw DivergenceError(0, "evolve_rk4: non-finite initial state");
  const auto sched = StepSchedule::make(horizon, dt);
  auto out = opts.basis == Rk4Basis::Fourier
                 ? detail::evolve_rk4_fourier(k0, a, horizon, sched, opts)
                 : detail::evolve_rk4_physical(k0, a, horizon, sched, opts);
  detail::notify(opts, out, sched.count());
  return out;
}

/// One-particle propagator P_t(x, y) = p_t(x - y), p_t the inverse transform
/// of exp(t (a^ - alpha)).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> one_particle_propagator(
    const JumpKernel<Scalar>& a, double t) {
  const GridSpec& grid = a.grid();
  const Index s = grid.sites();
  std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(s));
  for (Index i = 0; i < s; ++i)
    buf[static_cast<std::size_t>(i)] = std::exp(Scalar(t) * (a.multiplier()(i) - a.alpha()));
  AxisFFT<Scalar> fft(grid.sites_per_axis());
  fft.transform_all(buf, grid.dimension(), true);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(s);
  for (Index i = 0; i < s; ++i) p(i) = buf[static_cast<std::size_t>(i)].real();
  return detail::circulant<Scalar>(grid, p, Scalar(1));
}

/// Exact solution of the discretized hierarchy: the one-particle propagator
/// applied independently along every coordinate of each k^(n).
template <typename Scalar>
HierarchyState<Scalar> exact_propagate(const HierarchyState<Scalar>& k0,
                                       const JumpKernel<Scalar>& a, double t) {
  require_same_grid(k0.family.grid(), a.grid(), "exact_propagate");
  if (!(t >= 0.0)) throw InvalidInput("exact_propagate: t must be >= 0");
  HierarchyState<Scalar> out = k0;
  out.time = k0.time + t;
  if (t == 0.0) return out;
  const auto p = one_particle_propagator(a, t);
  const Index s = a.grid().sites();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tmp;
  for (int n = 1; n <= k0.family.order(); ++n) {
    auto& c = out.family.component(n);
    for (int i = 0; i < n; ++i) {
      detail::apply_on_coordinate(c, tmp, n, i, s, p);
      c.swap(tmp);
    }
  }
  return out;
}

/// rho_t for a one-particle density rho_0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> propagate_density(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rho, const JumpKernel<Scalar>& a, double t) {
  if (rho.size() != a.grid().sites()) throw InvalidInput("propagate_density: size mismatch");
  return one_particle_propagator(a, t) * rho;
}

/// Sup-norm distance between two families of equal shape.
template <typename Scalar>
Scalar sup_distance(const Family<Scalar>& x, const Family<Scalar>& y) {
  x.require_compatible(y);
  Scalar m(0);
  for (int n = 0; n <= x.order(); ++n)
    m = std::max(m, (x.component(n) - y.component(n)).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace fjd
