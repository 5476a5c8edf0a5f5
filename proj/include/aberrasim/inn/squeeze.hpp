#pragma once

#include <stdexcept>

#include "aberrasim/inn/tensor.hpp"

namespace aberrasim {

/// Checkerboard rearrangement C x H x W -> 4C x H/2 x W/2.  The four
/// sub-lattices appear in the fixed order (dx, dy) = (0,0), (1,0), (0,1),
/// (1,1) — column parity first — and are laid out sub-lattice-major:
/// output channel s*C + c holds sub-lattice s of input channel c.
template <typename T>
Tensor3<T> squeeze(const Tensor3<T>& t) {
  if (t.height % 2 != 0 || t.width % 2 != 0)
    throw std::invalid_argument("squeeze: height and width must be even");
  static constexpr int kOffsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  Tensor3<T> out(t.channels * 4, t.height / 2, t.width / 2);
  for (int s = 0; s < 4; ++s) {
    const int dx = kOffsets[s][0], dy = kOffsets[s][1];
    for (int c = 0; c < t.channels; ++c)
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
          out.at(s * t.channels + c, y, x) = t.at(c, 2 * y + dy, 2 * x + dx);
  }
  return out;
}

/// Exact inverse of squeeze: 4C x H x W -> C x 2H x 2W.
template <typename T>
Tensor3<T> unsqueeze(const Tensor3<T>& t) {
  if (t.channels % 4 != 0)
    throw std::invalid_argument("unsqueeze: channels must be divisible by 4");
  static constexpr int kOffsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const int C = t.channels / 4;
  Tensor3<T> out(C, t.height * 2, t.width * 2);
  for (int s = 0; s < 4; ++s) {
    const int dx = kOffsets[s][0], dy = kOffsets[s][1];
    for (int c = 0; c < C; ++c)
      for (int y = 0; y < t.height; ++y)
        for (int x = 0; x < t.width; ++x)
          out.at(c, 2 * y + dy, 2 * x + dx) = t.at(s * C + c, y, x);
  }
  return out;
}

}  // namespace aberrasim
