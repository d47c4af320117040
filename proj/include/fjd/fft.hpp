#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>
#include <span>
#include <vector>

#include "fjd/grid.hpp"

namespace fjd {

/// Discrete Fourier transforms along chosen axes of a row-major array whose
/// axes all have the same length M. Inverse transforms carry the 1/M factor.
template <typename Scalar>
class AxisFFT {
 public:
  using Complex = std::complex<Scalar>;

  explicit AxisFFT(int length) : m_(length), line_(static_cast<std::size_t>(length)),
                                 out_(static_cast<std::size_t>(length)) {}

  int length() const noexcept { return m_; }

  /// Transforms `data` (M^rank entries) along each listed axis.
  void transform(std::span<Complex> data, int rank, std::span<const int> axes, bool inverse) {
    for (int axis : axes) transform_axis(data, rank, axis, inverse);
  }

  void transform_all(std::span<Complex> data, int rank, bool inverse) {
    for (int axis = 0; axis < rank; ++axis) transform_axis(data, rank, axis, inverse);
  }

  void transform_axis(std::span<Complex> data, int rank, int axis, bool inverse) {
    Index stride = 1;
    for (int a = axis + 1; a < rank; ++a) stride *= m_;
    const Index block = stride * m_;
    const Index total = static_cast<Index>(data.size());
    for (Index outer = 0; outer < total; outer += block) {
      for (Index inner = 0; inner < stride; ++inner) {
        Complex* base = data.data() + outer + inner;
        for (int j = 0; j < m_; ++j) line_[static_cast<std::size_t>(j)] = base[j * stride];
        if (inverse)
          fft_.inv(out_, line_);
        else
          fft_.fwd(out_, line_);
        for (int j = 0; j < m_; ++j) base[j * stride] = out_[static_cast<std::size_t>(j)];
      }
    }
  }

 private:
  int m_;
  Eigen::FFT<Scalar> fft_;
  std::vector<Complex> line_, out_;
};

}  // namespace fjd
