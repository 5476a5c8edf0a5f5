#pragma once

#include <cmath>
#include <stdexcept>

#include "aberrasim/img/image.hpp"

namespace aberrasim {

/// PSNR cap reported for identical images (MSE = 0).
inline constexpr double kPsnrCap = 100.0;

/// Peak signal-to-noise ratio for range-1 data: 10*log10(1/MSE), capped
/// at 100 dB; the MSE pools all channels.
template <typename T>
double psnr(const ImageBuffer<T>& a, const ImageBuffer<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  double sse = 0.0;
  for (int ch = 0; ch < a.channels; ++ch)
    sse += (a.planes[ch].template cast<double>() -
            b.planes[ch].template cast<double>())
               .square()
               .sum();
  const double mse =
      sse / (static_cast<double>(a.height) * a.width * a.channels);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace detail {

/// 11x11 Gaussian window, sigma 1.5, normalized to unit sum.
inline Planed ssim_window() {
  constexpr int n = 11;
  constexpr double sigma = 1.5;
  Planed w(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double dy = r - n / 2, dx = c - n / 2;
      w(r, c) = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  return w / w.sum();
}

/// Windowed local mean at every pixel, reflect-padded to keep the size.
inline Planed local_mean(const Planed& img, const Planed& window) {
  const int H = static_cast<int>(img.rows());
  const int W = static_cast<int>(img.cols());
  const int n = static_cast<int>(window.rows());
  const int half = n / 2;
  Planed out(H, W);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a) {
        const int rr = reflect_index(r + a - half, H);
        for (int b = 0; b < n; ++b)
          acc += window(a, b) * img(rr, reflect_index(c + b - half, W));
      }
      out(r, c) = acc;
    }
  return out;
}

}  // namespace detail

/// Mean local structural similarity with the standard 11x11 Gaussian
/// window (sigma 1.5) and constants C1 = 0.01^2, C2 = 0.03^2 for range-1
/// data; channels are averaged.
template <typename T>
double ssim(const ImageBuffer<T>& a, const ImageBuffer<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  const double C1 = 0.01 * 0.01;
  const double C2 = 0.03 * 0.03;
  const Planed window = detail::ssim_window();
  double total = 0.0;
  for (int ch = 0; ch < a.channels; ++ch) {
    const Planed x = a.planes[ch].template cast<double>();
    const Planed y = b.planes[ch].template cast<double>();
    const Planed mx = detail::local_mean(x, window);
    const Planed my = detail::local_mean(y, window);
    const Planed mxx = detail::local_mean(Planed(x * x), window);
    const Planed myy = detail::local_mean(Planed(y * y), window);
    const Planed mxy = detail::local_mean(Planed(x * y), window);
    const Planed vx = mxx - mx * mx;
    const Planed vy = myy - my * my;
    const Planed cxy = mxy - mx * my;
    const Planed num =
        (2.0 * mx * my + C1) * (2.0 * cxy + C2);
    const Planed den =
        (mx * mx + my * my + C1) * (vx + vy + C2);
    total += (num / den).mean();
  }
  return total / a.channels;
}

}  // namespace aberrasim
