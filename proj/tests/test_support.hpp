#pragma once

#include <random>
#include <vector>

#include "fjd/family.hpp"
#include "fjd/kernel.hpp"

namespace fjd::test {

inline Family<double> random_family(const GridSpec& grid, int order, std::mt19937_64& rng,
                                    double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Family<double> f(grid, order);
  for (int n = 0; n <= order; ++n)
    for (Index i = 0; i < f.component(n).size(); ++i) f.component(n)(i) = u(rng);
  symmetrize(f);
  return f;
}

/// Random symmetric G supported on `window` (zero whenever an argument leaves it).
inline Family<double> random_windowed(const GridSpec& grid, int order,
                                      const std::vector<Index>& window, std::mt19937_64& rng) {
  auto g = random_family(grid, order, rng);
  g.set_window(window);
  for (int n = 1; n <= order; ++n) {
    auto& c = g.component(n);
    detail::for_each_tuple(grid.sites(), n, [&](Index flat, std::span<const Index> idx) {
      for (Index s : idx)
        if (!g.in_window(s)) c(flat) = 0.0;
    });
  }
  return g;
}

/// All subsets of `sites`, as explicit site lists (test-side enumeration).
inline std::vector<std::vector<Index>> all_subsets(const std::vector<Index>& sites) {
  std::vector<std::vector<Index>> out{{}};
  for (Index s : sites) {
    const auto n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto t = out[i];
      t.push_back(s);
      out.push_back(std::move(t));
    }
  }
  return out;
}

inline Eigen::VectorXd random_density(Index sites, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd r(sites);
  for (Index i = 0; i < sites; ++i) r(i) = u(rng);
  return r;
}

}  // namespace fjd::test
