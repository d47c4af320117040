#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fjd/configuration.hpp"
#include "fjd/errors.hpp"
#include "fjd/grid.hpp"

namespace fjd {

/// Default per-component entry cap (k^(n) holds M^(d n) entries).
inline constexpr Index kDefaultEntryCap = Index{1} << 26;

/// Truncated family (F^(0), ..., F^(N)) of symmetric grid tensors.
///
/// Component n is stored flat, row-major over its n site coordinates:
/// flat(x_1..x_n) = ((x_1 S + x_2) S + ...) with S = M^d. Component 0 is a
/// single scalar. The same type carries correlation families k and test
/// functions G; an optional window records the bounded support of G.
template <typename Scalar>
class Family {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Family() = default;

  Family(GridSpec grid, int order, Index entry_cap = kDefaultEntryCap) : grid_(grid) {
    if (order < 0) throw InvalidInput("truncation order must be >= 0");
    components_.reserve(static_cast<std::size_t>(order) + 1);
    Index size = 1;
    for (int n = 0; n <= order; ++n) {
      if (n > 0) {
        if (size > entry_cap / grid_.sites())
          throw CapacityError("component of order " + std::to_string(n) + " exceeds " +
                              std::to_string(entry_cap) + " entries");
        size *= grid_.sites();
      }
      components_.push_back(Vector::Zero(size));
    }
  }

  static Family zeros(GridSpec grid, int order) { return Family(grid, order); }

  const GridSpec& grid() const noexcept { return grid_; }
  int order() const noexcept { return static_cast<int>(components_.size()) - 1; }

  Vector& component(int n) { return components_.at(static_cast<std::size_t>(n)); }
  const Vector& component(int n) const { return components_.at(static_cast<std::size_t>(n)); }

  Scalar& scalar() { return components_.front()(0); }
  Scalar scalar() const { return components_.front()(0); }

  Index flat(std::span<const Index> sites) const {
    Index f = 0;
    for (Index s : sites) f = f * grid_.sites() + s;
    return f;
  }

  Scalar& at(std::span<const Index> sites) {
    return component(static_cast<int>(sites.size()))(flat(sites));
  }
  Scalar at(std::span<const Index> sites) const {
    return component(static_cast<int>(sites.size()))(flat(sites));
  }
  Scalar& at(std::initializer_list<Index> sites) {
    return at(std::span<const Index>(sites.begin(), sites.size()));
  }
  Scalar at(std::initializer_list<Index> sites) const {
    return at(std::span<const Index>(sites.begin(), sites.size()));
  }

  /// G(eta) for a finite configuration; zero beyond the truncation order.
  Scalar value(const FiniteConfiguration& eta) const {
    if (static_cast<int>(eta.size()) > order()) return Scalar(0);
    return at(eta.sites());
  }

  /// Bounded-support window; nullopt means the whole grid.
  const std::optional<std::vector<Index>>& window() const noexcept { return window_; }

  void set_window(std::vector<Index> sites) {
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    for (Index s : sites)
      if (s < 0 || s >= grid_.sites()) throw InvalidInput("window site outside grid");
    window_ = std::move(sites);
  }

  bool in_window(Index site) const {
    return !window_ || std::binary_search(window_->begin(), window_->end(), site);
  }

  Index total_entries() const {
    Index t = 0;
    for (const auto& c : components_) t += c.size();
    return t;
  }

  bool all_finite() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const Vector& c) { return c.allFinite(); });
  }

  Scalar max_abs() const {
    Scalar m(0);
    for (const auto& c : components_) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }

  Family& operator+=(const Family& o) {
    require_compatible(o);
    for (std::size_t i = 0; i < components_.size(); ++i) components_[i] += o.components_[i];
    return *this;
  }
  Family& operator-=(const Family& o) {
    require_compatible(o);
    for (std::size_t i = 0; i < components_.size(); ++i) components_[i] -= o.components_[i];
    return *this;
  }
  Family& operator*=(Scalar s) {
    for (auto& c : components_) c *= s;
    return *this;
  }
  friend Family operator+(Family a, const Family& b) { return a += b; }
  friend Family operator-(Family a, const Family& b) { return a -= b; }
  friend Family operator*(Scalar s, Family a) { return a *= s; }

  Family abs() const {
    Family out = *this;
    for (auto& c : out.components_) c = c.cwiseAbs();
    return out;
  }

  /// Copy restricted (or zero-extended) to orders 0..n.
  Family truncated(int n) const {
    Family out(grid_, n, std::numeric_limits<Index>::max());
    for (int i = 0; i <= std::min(n, order()); ++i) out.component(i) = component(i);
    out.window_ = window_;
    return out;
  }

  void require_compatible(const Family& o) const {
    require_same_grid(grid_, o.grid_, "family");
    if (order() != o.order()) throw InvalidInput("family truncation orders differ");
  }

 private:
  GridSpec grid_;
  std::vector<Vector> components_;
  std::optional<std::vector<Index>> window_;
};

namespace detail {

/// Calls f(flat, sites) for every index tuple of an order-n component.
template <typename F>
void for_each_tuple(Index sites_per_coord, int n, F&& f) {
  std::vector<Index> idx(static_cast<std::size_t>(n), 0);
  Index total = 1;
  for (int i = 0; i < n; ++i) total *= sites_per_coord;
  for (Index flat = 0; flat < total; ++flat) {
    f(flat, std::span<const Index>(idx));
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < sites_per_coord) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
}

}  // namespace detail

/// Averages every component over all coordinate permutations.
template <typename Scalar>
void symmetrize(Family<Scalar>& f) {
  for (int n = 2; n <= f.order(); ++n) {
    auto src = f.component(n);
    auto& dst = f.component(n);
    std::vector<Index> perm;
    detail::for_each_tuple(f.grid().sites(), n, [&](Index flat, std::span<const Index> idx) {
      perm.assign(idx.begin(), idx.end());
      std::sort(perm.begin(), perm.end());
      Scalar sum(0);
      Index count = 0;
      do {
        sum += src(f.flat(perm));
        ++count;
      } while (std::next_permutation(perm.begin(), perm.end()));
      // Repeated indices give fewer distinct permutations; the mean is unchanged.
      dst(flat) = sum / Scalar(count);
    });
  }
}

/// Largest deviation between an entry and its image under any coordinate transposition.
template <typename Scalar>
Scalar symmetry_defect(const Family<Scalar>& f) {
  Scalar worst(0);
  std::vector<Index> t;
  for (int n = 2; n <= f.order(); ++n) {
    const auto& c = f.component(n);
    detail::for_each_tuple(f.grid().sites(), n, [&](Index flat, std::span<const Index> idx) {
      for (int i = 0; i + 1 < n; ++i) {
        t.assign(idx.begin(), idx.end());
        std::swap(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(i) + 1]);
        worst = std::max(worst, Scalar(std::abs(c(flat) - c(f.flat(t)))));
      }
    });
  }
  return worst;
}

/// True when every component vanishes as soon as one argument leaves the window.
template <typename Scalar>
bool has_bounded_support(const Family<Scalar>& f) {
  if (!f.window()) return true;
  for (int n = 1; n <= f.order(); ++n) {
    const auto& c = f.component(n);
    bool ok = true;
    detail::for_each_tuple(f.grid().sites(), n, [&](Index flat, std::span<const Index> idx) {
      if (!ok || c(flat) == Scalar(0)) return;
      for (Index s : idx)
        if (!f.in_window(s)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

}  // namespace fjd
