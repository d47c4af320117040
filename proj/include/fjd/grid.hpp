#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fjd/errors.hpp"

namespace fjd {

using Index = std::int64_t;

/// Periodic d-dimensional grid with M sites per axis and spacing h.
///
/// Sites are numbered row-major over their d coordinates, so a site index
/// lies in [0, M^d). The same numbering is used for displacement cells.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int dimension, int sites_per_axis, double spacing)
      : d_(dimension), m_(sites_per_axis), h_(spacing) {
    if (d_ < 1) throw InvalidInput("grid dimension must be >= 1");
    if (m_ < 2) throw InvalidInput("grid needs at least 2 sites per axis");
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw InvalidInput("grid spacing must be positive");
    sites_ = 1;
    for (int i = 0; i < d_; ++i) sites_ *= m_;
  }

  int dimension() const noexcept { return d_; }
  int sites_per_axis() const noexcept { return m_; }
  double spacing() const noexcept { return h_; }
  double extent() const noexcept { return m_ * h_; }
  Index sites() const noexcept { return sites_; }
  double cell_volume() const noexcept { return std::pow(h_, d_); }
  double volume() const noexcept { return std::pow(extent(), d_); }

  /// Coordinates of a site, each in [0, M).
  std::vector<int> coords(Index site) const {
    std::vector<int> c(static_cast<std::size_t>(d_));
    for (int j = d_ - 1; j >= 0; --j) {
      c[static_cast<std::size_t>(j)] = static_cast<int>(site % m_);
      site /= m_;
    }
    return c;
  }

  Index site(const std::vector<int>& c) const {
    Index s = 0;
    for (int j = 0; j < d_; ++j) s = s * m_ + wrap(c[static_cast<std::size_t>(j)]);
    return s;
  }

  int wrap(int c) const noexcept { return ((c % m_) + m_) % m_; }

  /// Site of x - y (componentwise modulo M).
  Index difference(Index x, Index y) const {
    Index s = 0, stride = 1;
    for (int j = 0; j < d_; ++j) {
      const int cx = static_cast<int>(x % m_), cy = static_cast<int>(y % m_);
      s += wrap(cx - cy) * stride;
      stride *= m_;
      x /= m_;
      y /= m_;
    }
    return s;
  }

  Index negate(Index delta) const {
    Index s = 0, stride = 1;
    for (int j = 0; j < d_; ++j) {
      s += wrap(-static_cast<int>(delta % m_)) * stride;
      stride *= m_;
      delta /= m_;
    }
    return s;
  }

  /// Minimal-image displacement vector of a displacement cell, in length units.
  std::vector<double> min_image(Index delta) const {
    auto c = coords(delta);
    std::vector<double> v(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
      int k = c[j];
      if (2 * k > m_) k -= m_;
      v[j] = k * h_;
    }
    return v;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.d_ == b.d_ && a.m_ == b.m_ && a.h_ == b.h_;
  }

 private:
  int d_ = 1;
  int m_ = 2;
  double h_ = 1.0;
  Index sites_ = 2;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) throw GridMismatch(std::string(where) + ": grid mismatch");
}

}  // namespace fjd
