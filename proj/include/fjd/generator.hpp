#pragma once

#include <Eigen/Core>

#include "fjd/family.hpp"
#include "fjd/fft.hpp"
#include "fjd/kernel.hpp"

namespace fjd {

/// How the per-coordinate convolution a (*)_i k is evaluated.
enum class ConvolutionPath {
  Spectral,  ///< FFT along the coordinate's grid axes
  Direct,    ///< dense circulant sum h^d sum_y a(x - y) k(.., y, ..)
};

namespace detail {

inline Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

/// out = op applied along coordinate `coord` of an order-n component:
/// out(.., x, ..) = sum_y op(x, y) in(.., y, ..).
template <typename Scalar>
void apply_on_coordinate(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& in,
                         Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& out, int n, int coord, Index s,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& op) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index rows = ipow(s, n - 1 - coord);
  const Index slab = rows * s;
  out.resize(in.size());
  for (Index o = 0; o < in.size(); o += slab) {
    Eigen::Map<const Matrix> src(in.data() + o, rows, s);
    Eigen::Map<Matrix> dst(out.data() + o, rows, s);
    dst.noalias() = src * op.transpose();
  }
}

/// Circulant matrix C(x, y) = w * table(x - y) on the grid sites.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> circulant(
    const GridSpec& grid, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& table, Scalar w) {
  const Index s = grid.sites();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c(s, s);
  for (Index x = 0; x < s; ++x)
    for (Index y = 0; y < s; ++y) c(x, y) = w * table(grid.difference(x, y));
  return c;
}

template <typename Scalar>
void require_kernel_grid(const Family<Scalar>& k, const JumpKernel<Scalar>& a) {
  require_same_grid(k.grid(), a.grid(), "generator");
}

}  // namespace detail

/// A-part: (A k)^(n) = -alpha n k^(n).
template <typename Scalar>
Family<Scalar> generator_a_part(const Family<Scalar>& k, const JumpKernel<Scalar>& a) {
  detail::require_kernel_grid(k, a);
  Family<Scalar> out = k;
  for (int n = 0; n <= k.order(); ++n) out.component(n) *= -a.alpha() * Scalar(n);
  return out;
}

/// B-part: (B k)^(n) = sum_i a (*)_i k^(n), convolution with weight h^d in coordinate i.
template <typename Scalar>
Family<Scalar> generator_b_part(const Family<Scalar>& k, const JumpKernel<Scalar>& a,
                                ConvolutionPath path = ConvolutionPath::Spectral) {
  detail::require_kernel_grid(k, a);
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const GridSpec& grid = k.grid();
  const Index s = grid.sites();
  const int d = grid.dimension();
  Family<Scalar> out(grid, k.order(), std::numeric_limits<Index>::max());

  if (path == ConvolutionPath::Direct) {
    const auto c = detail::circulant<Scalar>(grid, a.values(), Scalar(grid.cell_volume()));
    Vector tmp;
    for (int n = 1; n <= k.order(); ++n)
      for (int i = 0; i < n; ++i) {
        detail::apply_on_coordinate(k.component(n), tmp, n, i, s, c);
        out.component(n) += tmp;
      }
    return out;
  }

  using Complex = std::complex<Scalar>;
  AxisFFT<Scalar> fft(grid.sites_per_axis());
  std::vector<Complex> buf;
  std::vector<int> axes(static_cast<std::size_t>(d));
  for (int n = 1; n <= k.order(); ++n) {
    const auto& in = k.component(n);
    auto& acc = out.component(n);
    for (int i = 0; i < n; ++i) {
      buf.assign(in.data(), in.data() + in.size());
      for (int j = 0; j < d; ++j) axes[static_cast<std::size_t>(j)] = i * d + j;
      fft.transform(buf, n * d, axes, false);
      const Index stride = detail::ipow(s, n - 1 - i);
      for (Index f = 0; f < in.size(); ++f)
        buf[static_cast<std::size_t>(f)] *= a.multiplier()((f / stride) % s);
      fft.transform(buf, n * d, axes, true);
      for (Index f = 0; f < in.size(); ++f) acc(f) += buf[static_cast<std::size_t>(f)].real();
    }
  }
  return out;
}

/// (L k)^(n) = -alpha n k^(n) + sum_i a (*)_i k^(n); order 0 maps to 0.
template <typename Scalar>
Family<Scalar> apply_generator(const Family<Scalar>& k, const JumpKernel<Scalar>& a,
                               ConvolutionPath path = ConvolutionPath::Spectral) {
  Family<Scalar> out = generator_b_part(k, a, path);
  for (int n = 1; n <= k.order(); ++n)
    out.component(n) -= a.alpha() * Scalar(n) * k.component(n);
  out.scalar() = Scalar(0);
  return out;
}

}  // namespace fjd
