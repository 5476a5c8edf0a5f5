#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aberrasim/core/fft.hpp"
#include "aberrasim/img/image.hpp"
#include "aberrasim/wavefront/psf_grid.hpp"

namespace aberrasim {

enum class ConvPath { Auto, Direct, Fft };

struct ConvolveOptions {
  ConvPath path = ConvPath::Auto;  // Auto: direct for kernels <= 7x7
  bool apply_illuminance = true;
  int threads = 0;
};

/// Half-width of the seam cross-fade band: weights ramp linearly over
/// 2*kSeamHalfBand pixels centred on each patch boundary, and the two
/// ramps meeting at a seam sum to exactly 1.
inline constexpr int kSeamHalfBand = 4;

namespace detail {

/// Valid-region correlation: out(r,c) = sum_k region(r+a, c+b) * k(a,b).
/// Callers pass a flipped kernel to get true convolution.
inline Planed conv_valid_direct(const Planed& region, const Planed& kernel) {
  const int kr = static_cast<int>(kernel.rows());
  const int kc = static_cast<int>(kernel.cols());
  const int orows = static_cast<int>(region.rows()) - kr + 1;
  const int ocols = static_cast<int>(region.cols()) - kc + 1;
  Planed out(orows, ocols);
  for (int r = 0; r < orows; ++r)
    for (int c = 0; c < ocols; ++c)
      out(r, c) = (region.block(r, c, kr, kc) * kernel).sum();
  return out;
}

/// Same valid correlation through zero-padded FFTs.
inline Planed conv_valid_fft(const Planed& region, const Planed& kernel) {
  const int rr = static_cast<int>(region.rows());
  const int rc = static_cast<int>(region.cols());
  const int kr = static_cast<int>(kernel.rows());
  const int kc = static_cast<int>(kernel.cols());
  auto next_pow2 = [](int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
  };
  const int LR = next_pow2(rr + kr - 1);
  const int LC = next_pow2(rc + kc - 1);
  PlaneCd A = PlaneCd::Zero(LR, LC);
  PlaneCd B = PlaneCd::Zero(LR, LC);
  A.block(0, 0, rr, rc) = region.cast<std::complex<double>>();
  // circular convolution with the flipped kernel equals correlation with
  // the kernel as passed, matching conv_valid_direct
  B.block(0, 0, kr, kc) = kernel.reverse().cast<std::complex<double>>();
  const PlaneCd full = ifft2(PlaneCd(fft2(A) * fft2(B)));
  return full.real().block(kr - 1, kc - 1, rr - kr + 1, rc - kc + 1);
}

/// Extracts region [r0, r0+h) x [c0, c0+w) with reflect padding.
inline Planed extract_reflect(const Planed& img, int r0, int c0, int h, int w) {
  const int R = static_cast<int>(img.rows());
  const int C = static_cast<int>(img.cols());
  Planed out(h, w);
  for (int r = 0; r < h; ++r) {
    const int rr = reflect_index(r0 + r, R);
    for (int c = 0; c < w; ++c) out(r, c) = img(rr, reflect_index(c0 + c, C));
  }
  return out;
}

/// Cross-fade weight of patch p (of `count`, extent `len`) at coordinate
/// x.  Ramps span [seam - half, seam + half); image borders keep full
/// weight.
inline double seam_weight(int p, int count, int len, int x) {
  const int h = kSeamHalfBand;
  const double band = 2.0 * h;
  double w = 1.0;
  if (p > 0) {  // leading seam at p*len
    const int s = p * len;
    if (x < s - h) return 0.0;
    if (x < s + h) w = std::min(w, (x - (s - h) + 0.5) / band);
  } else if (x < 0) {
    return 0.0;
  }
  if (p < count - 1) {  // trailing seam at (p+1)*len
    const int s = (p + 1) * len;
    if (x >= s + h) return 0.0;
    if (x >= s - h) w = std::min(w, ((s + h) - x - 0.5) / band);
  } else if (x >= count * len) {
    return 0.0;
  }
  return w;
}

/// Bilinear interpolation of the g x g illuminance knots (placed at patch
/// centres) at pixel (r, c); flat beyond the outer knots.
inline double illuminance_at(const Planed& grid, int r, int c, int ph,
                             int pw) {
  const int G = static_cast<int>(grid.rows());
  const double gy = (r + 0.5) / ph - 0.5;
  const double gx = (c + 0.5) / pw - 0.5;
  const int i0 =
      std::min(std::max(static_cast<int>(std::floor(gy)), 0), G - 2);
  const int j0 =
      std::min(std::max(static_cast<int>(std::floor(gx)), 0), G - 2);
  const double fy = std::min(std::max(gy - i0, 0.0), 1.0);
  const double fx = std::min(std::max(gx - j0, 0.0), 1.0);
  return (1 - fy) * ((1 - fx) * grid(i0, j0) + fx * grid(i0, j0 + 1)) +
         fy * ((1 - fx) * grid(i0 + 1, j0) + fx * grid(i0 + 1, j0 + 1));
}

}  // namespace detail

/// Applies the per-patch kernels of `grid` to `img`: each patch (plus a
/// half-band margin) is convolved with its kernel over reflect-padded
/// source data, the patches are re-assembled with a linear cross-fade
/// across the seam bands, and the result is scaled by the interpolated
/// relative-illuminance grid.  Dimensions that do not divide into the
/// patch layout are reflect-padded and cropped back.  An all-impulse
/// grid with unit illuminance returns the input exactly.
template <typename T>
ImageBuffer<T> convolve_patchwise(const ImageBuffer<T>& img,
                                  const PSFGrid<T>& grid,
                                  const ConvolveOptions& options = {}) {
  const int G = kPatchGridSize;
  if (grid.channels != img.channels && grid.channels != 1)
    throw std::invalid_argument(
        "convolve_patchwise: channel count mismatch between image and grid");
  if (img.height <= 0 || img.width <= 0)
    throw std::invalid_argument("convolve_patchwise: empty image");

  const int ph = (img.height + G - 1) / G;  // patch extent after padding
  const int pw = (img.width + G - 1) / G;
  const int H = ph * G, W = pw * G;
  if (grid.kernel_size > ph || grid.kernel_size > pw)
    throw std::invalid_argument("convolve_patchwise: kernel larger than patch");

  bool all_delta = true;
  for (const auto& k : grid.kernels)
    if (!k.is_delta()) {
      all_delta = false;
      break;
    }
  const bool unit_illuminance =
      grid.illuminance.size() == 0 || (grid.illuminance == T(1)).all();

  ImageBuffer<T> out(img.height, img.width, img.channels);
  if (all_delta && (!options.apply_illuminance || unit_illuminance)) {
    out.planes = img.planes;  // exact identity
    return out;
  }

  const int kr = grid.kernel_size / 2;
  const int margin = kSeamHalfBand;

  for (int ch = 0; ch < img.channels; ++ch) {
    const int gch = grid.channels == 1 ? 0 : ch;
    Planed src(H, W);
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c)
        src(r, c) = static_cast<double>(img.planes[ch](
            reflect_index(r, img.height), reflect_index(c, img.width)));

    Planed acc;
    if (all_delta) {
      acc = src;
    } else {
      acc = Planed::Zero(H, W);
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(dynamic) \
    num_threads(options.threads > 0 ? options.threads : omp_get_max_threads())
#endif
      for (int pi = 0; pi < G; ++pi) {
        for (int pj = 0; pj < G; ++pj) {
          const PSFKernel<T>& kern = grid.at(gch, pi, pj);
          // output span of this patch including the cross-fade margin
          const int r0 = std::max(0, pi * ph - margin);
          const int r1 = std::min(H, (pi + 1) * ph + margin);
          const int c0 = std::max(0, pj * pw - margin);
          const int c1 = std::min(W, (pj + 1) * pw + margin);
          const int oh = r1 - r0, ow = c1 - c0;

          const Planed region = detail::extract_reflect(
              src, r0 - kr, c0 - kr, oh + 2 * kr, ow + 2 * kr);
          // both paths correlate with their argument; flipping once here
          // turns that into true convolution with the kernel as given
          const Planed kd = kern.values.template cast<double>().reverse();
          const bool use_fft =
              options.path == ConvPath::Fft ||
              (options.path == ConvPath::Auto && kern.size > 7);
          const Planed conv = use_fft ? detail::conv_valid_fft(region, kd)
                                      : detail::conv_valid_direct(region, kd);

          for (int r = r0; r < r1; ++r) {
            const double wy = detail::seam_weight(pi, G, ph, r);
            if (wy == 0.0) continue;
            for (int c = c0; c < c1; ++c) {
              const double wx = detail::seam_weight(pj, G, pw, c);
              if (wx == 0.0) continue;
              const double v = wy * wx * conv(r - r0, c - c0);
#ifdef _OPENMP
#pragma omp atomic
#endif
              acc(r, c) += v;
            }
          }
        }
      }
    }

    const bool use_illum =
        options.apply_illuminance && grid.illuminance.size() > 0;
    Planed illum;
    if (use_illum) illum = grid.illuminance.template cast<double>();
    for (int r = 0; r < img.height; ++r)
      for (int c = 0; c < img.width; ++c) {
        double v = acc(r, c);
        if (use_illum) v *= detail::illuminance_at(illum, r, c, ph, pw);
        out.planes[ch](r, c) = static_cast<T>(std::min(std::max(v, 0.0), 1.0));
      }
  }
  return out;
}

}  // namespace aberrasim
