#pragma once

#include <cmath>
#include <numbers>

#include "fjd/generator.hpp"
#include "fjd/lebesgue_poisson.hpp"

namespace fjd {

template <typename Scalar>
struct MassFunctionals {
  Scalar phi;       ///< sum_n e^{-theta n} h^{dn}/n! sum v^(n)
  Scalar phi_beta;  ///< the same with the extra factor n
};

template <typename Scalar>
MassFunctionals<Scalar> mass_functionals(const Family<Scalar>& v, double theta) {
  MassFunctionals<Scalar> m{v.scalar(), Scalar(0)};
  for (int n = 1; n <= v.order(); ++n) {
    const Scalar s = Scalar(lp_weight(v.grid(), n, theta)) * v.component(n).sum();
    m.phi += s;
    m.phi_beta += Scalar(n) * s;
  }
  return m;
}

/// Smallest C with k^(n) <= C^n on the grid for 1 <= n <= N.
/// Entries below -1e-12 max|k| are rejected; smaller negatives count as rounding.
template <typename Scalar>
Scalar sub_poissonian_constant(const Family<Scalar>& k) {
  if (k.order() < 1) throw InvalidInput("sub_poissonian_constant: order must be >= 1");
  const Scalar tol = Scalar(1e-12) * k.max_abs();
  Scalar c(0);
  for (int n = 1; n <= k.order(); ++n) {
    const auto& comp = k.component(n);
    if (comp.minCoeff() < -tol)
      throw InvalidInput("sub_poissonian_constant: negative correlation value");
    const Scalar top = std::max(Scalar(0), comp.maxCoeff());
    c = std::max(c, Scalar(std::pow(top, Scalar(1) / Scalar(n))));
  }
  return c;
}

template <typename Scalar>
struct BoundCheck {
  Scalar lhs;
  Scalar rhs;
  bool ok;
};

/// ||L^n v||_{theta,1} against (2 alpha n / (e (theta - theta')))^n ||v||_{theta',1}.
template <typename Scalar>
BoundCheck<Scalar> power_bound_check(const Family<Scalar>& v, const JumpKernel<Scalar>& a, int n,
                                     double theta_prime, double theta,
                                     ConvolutionPath path = ConvolutionPath::Spectral) {
  if (!(theta_prime < theta)) throw InvalidInput("power_bound_check: requires theta' < theta");
  if (n < 1) throw InvalidInput("power_bound_check: power must be >= 1");
  Family<Scalar> w = v;
  for (int i = 0; i < n; ++i) w = apply_generator(w, a, path);
  const Scalar lhs = norm_l1(w, theta);
  const Scalar factor =
      Scalar(2.0 * double(a.alpha()) * n / (std::numbers::e * (theta - theta_prime)));
  const Scalar rhs = std::pow(factor, n) * norm_l1(v, theta_prime);
  return {lhs, rhs, lhs <= rhs * Scalar(1 + 1e-9)};
}

/// ||B v||_{theta,1} against ||A v||_{theta,1}; equal when v >= 0.
template <typename Scalar>
BoundCheck<Scalar> b_dominated_by_a_check(const Family<Scalar>& v, const JumpKernel<Scalar>& a,
                                          double theta,
                                          ConvolutionPath path = ConvolutionPath::Spectral) {
  const Scalar b = norm_l1(generator_b_part(v, a, path), theta);
  const Scalar an = norm_l1(generator_a_part(v, a), theta);
  return {b, an, b <= an * Scalar(1 + 1e-9)};
}

}  // namespace fjd
