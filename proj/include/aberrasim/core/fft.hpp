#pragma once

#include <complex>

#include <unsupported/Eigen/FFT>

#include "aberrasim/core/types.hpp"

namespace aberrasim {

/// 2-D FFT helpers built on Eigen's bundled kissfft backend.
/// Convention matches the usual DFT: forward unscaled, inverse scaled by
/// 1/(rows*cols).  A thread-local engine caches plans per transform size.

template <typename T>
Eigen::FFT<T>& fft_engine() {
  static thread_local Eigen::FFT<T> engine;
  return engine;
}

/// Forward 2-D DFT, rows then columns.
template <typename T>
PlaneC<T> fft2(const PlaneC<T>& in) {
  using VecC = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;
  Eigen::FFT<T>& fft = fft_engine<T>();
  const Eigen::Index rows = in.rows(), cols = in.cols();
  PlaneC<T> out(rows, cols);
  VecC line(cols), tline(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    line = in.row(r).matrix().transpose();
    fft.fwd(tline, line);
    out.row(r) = tline.transpose().array();
  }
  VecC col(rows), tcol(rows);
  for (Eigen::Index c = 0; c < cols; ++c) {
    col = out.col(c).matrix();
    fft.fwd(tcol, col);
    out.col(c) = tcol.array();
  }
  return out;
}

/// Inverse 2-D DFT, scaled by 1/(rows*cols).
template <typename T>
PlaneC<T> ifft2(const PlaneC<T>& in) {
  using VecC = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, 1>;
  Eigen::FFT<T>& fft = fft_engine<T>();
  const Eigen::Index rows = in.rows(), cols = in.cols();
  PlaneC<T> out(rows, cols);
  VecC line(cols), tline(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    line = in.row(r).matrix().transpose();
    fft.inv(tline, line);
    out.row(r) = tline.transpose().array();
  }
  VecC col(rows), tcol(rows);
  for (Eigen::Index c = 0; c < cols; ++c) {
    col = out.col(c).matrix();
    fft.inv(tcol, col);
    out.col(c) = tcol.array();
  }
  return out;
}

/// Circularly shifts so the zero-frequency bin moves to the array centre
/// (index n/2).  Inverse of ifftshift; the two differ for odd sizes.
template <typename Derived>
typename Derived::PlainObject fftshift(const Eigen::ArrayBase<Derived>& in) {
  const Eigen::Index rows = in.rows(), cols = in.cols();
  const Eigen::Index sr = rows / 2, sc = cols / 2;
  typename Derived::PlainObject out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      out((r + rows - sr) % rows, (c + cols - sc) % cols) = in(r, c);
  return out;
}

/// Moves the centre sample (index n/2) to index 0.
template <typename Derived>
typename Derived::PlainObject ifftshift(const Eigen::ArrayBase<Derived>& in) {
  const Eigen::Index rows = in.rows(), cols = in.cols();
  const Eigen::Index sr = rows / 2, sc = cols / 2;
  typename Derived::PlainObject out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      out(r, c) = in((r + sr) % rows, (c + sc) % cols);
  return out;
}

/// Centred forward transform: fftshift(fft2(ifftshift(x))).  Maps a field
/// sampled symmetrically about the origin to a spectrum sampled the same
/// way, which keeps a real even input real and even.
template <typename T>
PlaneC<T> cfft2(const PlaneC<T>& in) {
  return fftshift(fft2(PlaneC<T>(ifftshift(in))));
}

template <typename T>
PlaneC<T> cifft2(const PlaneC<T>& in) {
  return fftshift(ifft2(PlaneC<T>(ifftshift(in))));
}

}  // namespace aberrasim
