#pragma once

#include <cmath>
#include <cstdint>

#include "aberrasim/core/random.hpp"
#include "aberrasim/img/image.hpp"

namespace aberrasim {

/// Heteroscedastic Gaussian sensor noise: per-pixel variance a*I + b.
struct NoiseModel {
  double a = 1e-3;  // signal-dependent variance slope
  double b = 1e-4;  // signal-independent variance floor
  std::uint64_t seed = 0;
};

/// Adds zero-mean Gaussian noise with variance a*I + b and clamps to
/// [0,1].  The image is processed in 32x32-pixel tiles, each drawing from
/// its own (seed, tile-index) stream, so the result is independent of
/// threading or traversal order.  a = b = 0 returns the input unchanged.
template <typename T>
ImageBuffer<T> add_noise(const ImageBuffer<T>& img, const NoiseModel& model) {
  if (model.a < 0 || model.b < 0)
    throw std::invalid_argument("add_noise: variance coefficients must be >= 0");
  ImageBuffer<T> out = img;
  if (model.a == 0 && model.b == 0) return out;

  constexpr int tile = 32;
  const int tiles_x = (img.width + tile - 1) / tile;
  const int tiles_y = (img.height + tile - 1) / tile;
  for (int ch = 0; ch < img.channels; ++ch) {
    for (int ty = 0; ty < tiles_y; ++ty) {
      for (int tx = 0; tx < tiles_x; ++tx) {
        const std::uint64_t stream =
            (static_cast<std::uint64_t>(ch) * tiles_y + ty) * tiles_x + tx;
        NormalSampler normal(mix_seed(model.seed, stream));
        const int r1 = std::min(img.height, (ty + 1) * tile);
        const int c1 = std::min(img.width, (tx + 1) * tile);
        for (int r = ty * tile; r < r1; ++r)
          for (int c = tx * tile; c < c1; ++c) {
            const double I = static_cast<double>(img.planes[ch](r, c));
            const double sigma = std::sqrt(model.a * I + model.b);
            const double v = I + sigma * normal();
            out.planes[ch](r, c) =
                static_cast<T>(std::min(std::max(v, 0.0), 1.0));
          }
      }
    }
  }
  return out;
}

}  // namespace aberrasim
