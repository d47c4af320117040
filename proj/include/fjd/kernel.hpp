#pragma once

#include <cmath>
#include <complex>
#include <variant>
#include <vector>

#include "fjd/fft.hpp"
#include "fjd/grid.hpp"

namespace fjd {

struct GaussianShape {
  double sigma;
};
struct BallShape {
  double radius;
};
/// Raw displacement table indexed like grid sites (displacement cell = site of Delta).
struct TableShape {
  std::vector<double> values;
};
using KernelShape = std::variant<GaussianShape, BallShape, TableShape>;

/// Discretized symmetric jump kernel a(Delta) with total rate alpha = h^d sum a.
template <typename Scalar>
class JumpKernel {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

  JumpKernel() = default;

  /// Builds from a displacement table; the table is symmetrized by averaging
  /// a(Delta) with a(-Delta).
  JumpKernel(GridSpec grid, const Vector& table, double width = 0.0) : grid_(grid), width_(width) {
    if (table.size() != grid_.sites()) throw InvalidInput("kernel table size != site count");
    if (!table.allFinite()) throw InvalidInput("kernel table has non-finite entries");
    if ((table.array() < Scalar(0)).any()) throw InvalidInput("kernel table has negative entries");
    values_.resize(table.size());
    for (Index s = 0; s < table.size(); ++s)
      values_(s) = (table(s) + table(grid_.negate(s))) / Scalar(2);
    alpha_ = Scalar(grid_.cell_volume()) * values_.sum();
    if (!(alpha_ > Scalar(0))) throw InvalidInput("kernel has zero total rate");
    compute_multiplier();
  }

  const GridSpec& grid() const noexcept { return grid_; }
  const Vector& values() const noexcept { return values_; }
  Scalar alpha() const noexcept { return alpha_; }
  /// Characteristic width in length units (sigma, radius, or support radius).
  double width() const noexcept { return width_; }

  /// Spectral transform a^(xi) = h^d sum_Delta a(Delta) exp(-2 pi i xi.Delta / M).
  const ComplexVector& multiplier() const noexcept { return multiplier_; }
  /// Real part of the multiplier (the imaginary part vanishes for symmetric tables).
  const Vector& symbol() const noexcept { return symbol_; }

  Scalar operator()(Index delta) const { return values_(delta); }

 private:
  void compute_multiplier() {
    const Index s = grid_.sites();
    std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(s));
    for (Index i = 0; i < s; ++i) buf[static_cast<std::size_t>(i)] = values_(i);
    AxisFFT<Scalar> fft(grid_.sites_per_axis());
    fft.transform_all(buf, grid_.dimension(), false);
    multiplier_.resize(s);
    symbol_.resize(s);
    const Scalar hd = Scalar(grid_.cell_volume());
    for (Index i = 0; i < s; ++i) {
      multiplier_(i) = hd * buf[static_cast<std::size_t>(i)];
      symbol_(i) = multiplier_(i).real();
    }
  }

  GridSpec grid_;
  Vector values_;
  Scalar alpha_{};
  double width_ = 0.0;
  ComplexVector multiplier_;
  Vector symbol_;
};

/// Builds a kernel of the given shape rescaled so that h^d sum a = alpha_target.
template <typename Scalar = double>
JumpKernel<Scalar> make_kernel(const KernelShape& shape, Scalar alpha_target, const GridSpec& grid) {
  if (!(alpha_target > Scalar(0)) || !std::isfinite(double(alpha_target)))
    throw InvalidInput("alpha_target must be positive");
  using Vector = typename JumpKernel<Scalar>::Vector;
  const Index s = grid.sites();
  const double half_box = grid.extent() / 2.0;
  Vector table = Vector::Zero(s);
  double width = 0.0;

  auto radius_of = [&](Index delta) {
    double r2 = 0.0;
    for (double v : grid.min_image(delta)) r2 += v * v;
    return std::sqrt(r2);
  };

  if (const auto* g = std::get_if<GaussianShape>(&shape)) {
    if (!(g->sigma > 0.0)) throw InvalidInput("gaussian sigma must be positive");
    if (3.0 * g->sigma > half_box)
      throw AliasingError("gaussian kernel: 3 sigma exceeds half the box");
    for (Index i = 0; i < s; ++i) {
      const double r = radius_of(i);
      table(i) = Scalar(std::exp(-r * r / (2.0 * g->sigma * g->sigma)));
    }
    width = g->sigma;
  } else if (const auto* b = std::get_if<BallShape>(&shape)) {
    if (!(b->radius > 0.0)) throw InvalidInput("ball radius must be positive");
    if (b->radius > half_box) throw AliasingError("ball kernel: radius exceeds half the box");
    for (Index i = 0; i < s; ++i)
      if (radius_of(i) <= b->radius * (1.0 + 1e-12)) table(i) = Scalar(1);
    width = b->radius;
  } else {
    const auto& t = std::get<TableShape>(shape);
    if (static_cast<Index>(t.values.size()) != s)
      throw InvalidInput("custom kernel table size != site count");
    for (Index i = 0; i < s; ++i) {
      table(i) = Scalar(t.values[static_cast<std::size_t>(i)]);
      if (table(i) != Scalar(0)) width = std::max(width, radius_of(i));
    }
  }
  if (!table.allFinite() || (table.array() < Scalar(0)).any())
    throw InvalidInput("kernel table must be finite and nonnegative");
  const Scalar raw = Scalar(grid.cell_volume()) * table.sum();
  if (!(raw > Scalar(0))) throw InvalidInput("kernel table is identically zero");
  table *= alpha_target / raw;
  return JumpKernel<Scalar>(grid, table, width);
}

}  // namespace fjd
