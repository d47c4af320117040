#pragma once

#include <cmath>
#include <limits>

#include "fjd/family.hpp"

namespace fjd {

/// Quadrature weight of the order-n sector: e^{-theta n} h^{d n} / n!.
inline double lp_weight(const GridSpec& grid, int n, double theta) {
  return std::exp(-theta * n + n * grid.dimension() * std::log(grid.spacing()) -
                  std::lgamma(n + 1.0));
}

namespace detail {

template <typename Scalar>
void require_finite(const Family<Scalar>& f, const char* where) {
  if (!f.all_finite()) throw InvalidInput(std::string(where) + ": non-finite component value");
}

}  // namespace detail

/// Lebesgue-Poisson integral of G with the exponential weight e^{-theta |eta|}.
/// theta = 0 is the plain Lebesgue-Poisson integral.
template <typename Scalar>
Scalar lp_integral(const Family<Scalar>& g, double theta = 0.0) {
  detail::require_finite(g, "lp_integral");
  Scalar sum = g.scalar();
  for (int n = 1; n <= g.order(); ++n)
    sum += Scalar(lp_weight(g.grid(), n, theta)) * g.component(n).sum();
  return sum;
}

/// <<G, k>> = sum_n h^{dn}/n! sum G^(n) k^(n), paired up to the smaller order.
template <typename Scalar>
Scalar pairing(const Family<Scalar>& g, const Family<Scalar>& k) {
  require_same_grid(g.grid(), k.grid(), "pairing");
  detail::require_finite(g, "pairing");
  detail::require_finite(k, "pairing");
  Scalar sum = g.scalar() * k.scalar();
  const int n_max = std::min(g.order(), k.order());
  for (int n = 1; n <= n_max; ++n)
    sum += Scalar(lp_weight(g.grid(), n, 0.0)) * g.component(n).dot(k.component(n));
  return sum;
}

/// ||k||_{theta,inf} = max_n e^{theta n} max |k^(n)|.
template <typename Scalar>
Scalar norm_sup(const Family<Scalar>& k, double theta) {
  Scalar best(0);
  for (int n = 0; n <= k.order(); ++n)
    best = std::max(best, Scalar(std::exp(theta * n)) * k.component(n).cwiseAbs().maxCoeff());
  return best;
}

/// ||v||_{theta,1}: Lebesgue-Poisson integral of |v| e^{-theta |eta|}.
template <typename Scalar>
Scalar norm_l1(const Family<Scalar>& v, double theta) {
  Scalar sum = std::abs(v.scalar());
  for (int n = 1; n <= v.order(); ++n)
    sum += Scalar(lp_weight(v.grid(), n, theta)) * v.component(n).cwiseAbs().sum();
  return sum;
}

/// Correlation family of the Poisson measure with density rho: k^(n) = prod rho(x_j).
template <typename Scalar>
Family<Scalar> poisson_family(const GridSpec& grid,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rho, int order) {
  if (rho.size() != grid.sites()) throw InvalidInput("poisson_family: density size != site count");
  if (!rho.allFinite()) throw InvalidInput("poisson_family: non-finite density");
  if ((rho.array() < Scalar(0)).any()) throw InvalidInput("poisson_family: negative density");
  Family<Scalar> k(grid, order);
  k.scalar() = Scalar(1);
  if (order >= 1) k.component(1) = rho;
  const Index s = grid.sites();
  for (int n = 2; n <= order; ++n) {
    const auto& prev = k.component(n - 1);
    auto& cur = k.component(n);
    for (Index i = 0; i < prev.size(); ++i) cur.segment(i * s, s) = prev(i) * rho;
  }
  return k;
}

template <typename Scalar>
Family<Scalar> poisson_family(const GridSpec& grid, Scalar kappa, int order) {
  return poisson_family<Scalar>(
      grid, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Constant(grid.sites(), kappa), order);
}

}  // namespace fjd
