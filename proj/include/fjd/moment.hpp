#pragma once

#include <cmath>
#include <vector>

#include "fjd/configuration.hpp"
#include "fjd/family.hpp"

namespace fjd {

/// Density mu(gamma) over all subsets gamma of a finite window (bit-mask indexed).
template <typename Scalar>
struct WindowDensity {
  FiniteConfiguration window;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  WindowDensity() = default;
  WindowDensity(FiniteConfiguration w, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mu)
      : window(std::move(w)), weights(std::move(mu)) {
    require_enumerable(window.size(), "WindowDensity");
    if (weights.size() != (Index{1} << window.size()))
      throw InvalidInput("WindowDensity: expected 2^m weights");
  }

  std::size_t sites() const noexcept { return window.size(); }
  Scalar total() const { return weights.sum(); }
};

/// Correlation values k(eta) for subsets eta of a window with |eta| <= order.
/// Entries above the order are stored as zero.
template <typename Scalar>
struct WindowCorrelation {
  FiniteConfiguration window;
  int order = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;

  WindowCorrelation() = default;
  WindowCorrelation(FiniteConfiguration w, int n, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> k)
      : window(std::move(w)), order(n), values(std::move(k)) {
    require_enumerable(window.size(), "WindowCorrelation");
    if (values.size() != (Index{1} << window.size()))
      throw InvalidInput("WindowCorrelation: expected 2^m values");
  }

  /// Values known on every subset of the window.
  bool complete() const { return order >= static_cast<int>(window.size()); }
};

template <typename Scalar>
struct MomentViolation {
  FiniteConfiguration subset;
  Scalar weight;
};

/// Outcome of inverting a window correlation into a density.
template <typename Scalar>
struct MomentReport {
  WindowDensity<Scalar> density;
  bool certified = false;
  Scalar tolerance{};
  std::vector<MomentViolation<Scalar>> violations;
};

namespace detail {

// In place: v[S] <- sum over T superset of S of v[T] (sign = -1 gives the Moebius inverse).
template <typename Vec>
void superset_transform(Vec& v, std::size_t m, int sign) {
  const SubsetMask full = static_cast<SubsetMask>((std::size_t{1} << m) - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const SubsetMask bit = SubsetMask{1} << i;
    for (SubsetMask s = 0; s <= full; ++s) {
      if (!(s & bit)) v(s) += sign * v(s | bit);
      if (s == full) break;
    }
  }
}

}  // namespace detail

/// k(eta) = sum over gamma in the window with gamma containing eta of mu(gamma), |eta| <= order.
template <typename Scalar>
WindowCorrelation<Scalar> correlation_from_density(const WindowDensity<Scalar>& mu, int order) {
  require_enumerable(mu.sites(), "correlation_from_density");
  if (!mu.weights.allFinite()) throw InvalidInput("correlation_from_density: non-finite weight");
  auto k = mu.weights;
  detail::superset_transform(k, mu.sites(), +1);
  for (Index s = 0; s < k.size(); ++s)
    if (popcount(static_cast<SubsetMask>(s)) > order) k(s) = Scalar(0);
  return {mu.window, order, std::move(k)};
}

/// Inclusion-exclusion inversion mu(gamma) = sum over eta containing gamma of
/// (-1)^{|eta \ gamma|} k(eta). Certifies k when every weight is >= -1e-9 max|k|.
template <typename Scalar>
MomentReport<Scalar> density_from_correlation(const WindowCorrelation<Scalar>& k) {
  require_enumerable(k.window.size(), "density_from_correlation");
  if (!k.complete())
    throw InvalidInput("density_from_correlation: values required on every subset of the window");
  if (!k.values.allFinite()) throw InvalidInput("density_from_correlation: non-finite value");
  if (std::abs(k.values(0) - Scalar(1)) > Scalar(1e-12))
    throw NormalizationError("density_from_correlation: k(empty) must equal 1");

  MomentReport<Scalar> report;
  auto mu = k.values;
  detail::superset_transform(mu, k.window.size(), -1);
  report.tolerance = Scalar(1e-9) * k.values.cwiseAbs().maxCoeff();
  for (Index s = 0; s < mu.size(); ++s)
    if (mu(s) < -report.tolerance)
      report.violations.push_back({k.window.subset(static_cast<SubsetMask>(s)), mu(s)});
  report.certified = report.violations.empty();
  report.density = WindowDensity<Scalar>(k.window, std::move(mu));
  return report;
}

/// Lattice correlation densities on the grid: k^(n)(x_1..x_n) = k({x_1..x_n}) / h^{dn}
/// for distinct window sites, zero on coincident arguments and outside the window.
template <typename Scalar>
Family<Scalar> to_family(const WindowCorrelation<Scalar>& k, const GridSpec& grid) {
  for (Index s : k.window.sites())
    if (s < 0 || s >= grid.sites()) throw InvalidInput("to_family: window site outside grid");
  const int order = std::min<int>(k.order, static_cast<int>(k.window.size()));
  Family<Scalar> out(grid, order);
  out.scalar() = k.values(0);
  std::vector<Index> sites;
  for (Index s = 1; s < k.values.size(); ++s) {
    const int n = popcount(static_cast<SubsetMask>(s));
    if (n > order) continue;
    const auto sub = k.window.subset(static_cast<SubsetMask>(s));
    sites.assign(sub.sites().begin(), sub.sites().end());
    const Scalar v = k.values(s) / Scalar(std::pow(grid.cell_volume(), n));
    do {
      out.at(sites) = v;
    } while (std::next_permutation(sites.begin(), sites.end()));
  }
  out.set_window({k.window.sites().begin(), k.window.sites().end()});
  return out;
}

/// Product Bernoulli(kappa) density on a window of m sites.
template <typename Scalar>
WindowDensity<Scalar> bernoulli_density(const FiniteConfiguration& window, Scalar kappa) {
  require_enumerable(window.size(), "bernoulli_density");
  const std::size_t m = window.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mu(Index{1} << m);
  for (Index s = 0; s < mu.size(); ++s) {
    const int c = popcount(static_cast<SubsetMask>(s));
    mu(s) = std::pow(kappa, c) * std::pow(Scalar(1) - kappa, static_cast<int>(m) - c);
  }
  return {window, std::move(mu)};
}

}  // namespace fjd
