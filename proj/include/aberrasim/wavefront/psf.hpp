#pragma once

#include <cmath>
#include <stdexcept>

#include "aberrasim/core/fft.hpp"
#include "aberrasim/wavefront/pupil.hpp"

namespace aberrasim {

/// Normalized point-spread kernel for one field patch and one channel.
/// `center_offset` preserves the sub-sample displacement of the energy
/// centroid relative to the window centre (window positions are integral).
template <typename T>
struct PSFKernel {
  int size = 0;            // odd pixel extent
  Plane<T> values;         // size x size, nonnegative, sums to 1
  int field_i = -1;        // patch row in the 32 x 32 layout
  int field_j = -1;        // patch column
  int channel = -1;        // color channel, -1 = single wavelength
  T lambda_nm = T(0);      // 0 when polychromatic
  T pixel_pitch = T(0);    // mm per sample
  Vec2<T> center_offset = Vec2<T>::Zero();  // samples (x, y)

  /// True for an exactly centred unit impulse.
  bool is_delta() const {
    if (size % 2 == 0 || values.size() == 0) return false;
    const int c = size / 2;
    for (int r = 0; r < size; ++r)
      for (int q = 0; q < size; ++q) {
        const T want = (r == c && q == c) ? T(1) : T(0);
        if (values(r, q) != want) return false;
      }
    return true;
  }
};

/// Centred DFT of the zero-padded pupil function: the amplitude spread
/// over the image plane.  The returned grid has side n * padding.
template <typename T>
PlaneC<T> amplitude_spread(const PlaneC<T>& P, int padding = 4) {
  if (padding < 2)
    throw std::invalid_argument("amplitude_spread: padding factor must be >= 2");
  const int n = static_cast<int>(P.rows());
  const int N = n * padding;
  PlaneC<T> padded = PlaneC<T>::Zero(N, N);
  const int off = (N - n) / 2;
  padded.block(off, off, n, n) = P;
  return cfft2(padded);
}

/// Image-plane sample spacing of the amplitude spread, in mm:
/// delta_u = lambda * R / (N * delta_x).
template <typename T>
T asf_sample_spacing(const PupilMap<T>& map, int padding = 4) {
  const T lambda_mm = map.lambda_nm * T(1e-6);
  return lambda_mm * map.ref_radius /
         (T(map.n * padding) * map.sample_spacing);
}

/// Squared magnitude of the amplitude spread, cropped to an odd window
/// centred on the (rounded) energy centroid and normalized to unit sum.
template <typename T>
PSFKernel<T> psf_from_asf(const PlaneC<T>& h, int out_size) {
  const int N = static_cast<int>(h.rows());
  if (out_size % 2 == 0 || out_size >= N)
    throw std::invalid_argument(
        "psf_from_asf: out_size must be odd and smaller than the grid");
  Plane<T> intensity = h.abs2();
  const T total = intensity.sum();
  if (!(total > T(0)))
    throw std::runtime_error("psf_from_asf: degenerate all-zero field");

  T cx = T(0), cy = T(0);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) {
      cx += intensity(r, c) * T(c);
      cy += intensity(r, c) * T(r);
    }
  cx /= total;
  cy /= total;

  const int half = out_size / 2;
  const auto clamp_center = [&](T v) {
    int c = static_cast<int>(std::lround(double(v)));
    return std::min(std::max(c, half), N - 1 - half);
  };
  const int wx = clamp_center(cx);
  const int wy = clamp_center(cy);

  PSFKernel<T> kernel;
  kernel.size = out_size;
  kernel.values = intensity.block(wy - half, wx - half, out_size, out_size);
  const T wsum = kernel.values.sum();
  if (!(wsum > T(0)))
    throw std::runtime_error("psf_from_asf: window contains no energy");
  kernel.values /= wsum;
  kernel.center_offset = Vec2<T>(cx - T(wx), cy - T(wy));
  return kernel;
}

/// Area-weighted 1-D resampling matrix from `n_src` cells of width
/// `src_pitch` to `n_dst` cells of width `dst_pitch`.  Cell i is centred
/// at (i - (n-1)/2) * pitch + centre offset; `src_shift` displaces the
/// source grid.  Each source cell's mass spreads uniformly over its
/// width, so total mass is conserved up to window clipping.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> resample_matrix(
    int n_src, T src_pitch, T src_shift, int n_dst, T dst_pitch) {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> W =
      Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_dst, n_src);
  const T src_c = T(0.5) * T(n_src - 1);
  const T dst_c = T(0.5) * T(n_dst - 1);
  for (int j = 0; j < n_dst; ++j) {
    const T lo = (T(j) - dst_c) * dst_pitch - T(0.5) * dst_pitch;
    const T hi = lo + dst_pitch;
    for (int i = 0; i < n_src; ++i) {
      const T slo = (T(i) - src_c) * src_pitch + src_shift -
                    T(0.5) * src_pitch;
      const T shi = slo + src_pitch;
      const T overlap = std::min(hi, shi) - std::max(lo, slo);
      if (overlap > T(0)) W(j, i) = overlap / src_pitch;
    }
  }
  return W;
}

/// Resamples a kernel grid from `src_pitch` to `dst_pitch` sampling,
/// shifting the source by (shift_x, shift_y) mm, preserving energy.
template <typename T>
Plane<T> resample_kernel(const Plane<T>& values, T src_pitch, T dst_pitch,
                         int out_size, T shift_x = T(0), T shift_y = T(0)) {
  const auto Wy = resample_matrix(static_cast<int>(values.rows()), src_pitch,
                                  shift_y, out_size, dst_pitch);
  const auto Wx = resample_matrix(static_cast<int>(values.cols()), src_pitch,
                                  shift_x, out_size, dst_pitch);
  return (Wy * values.matrix() * Wx.transpose()).array();
}

}  // namespace aberrasim
