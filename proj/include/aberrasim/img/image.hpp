#pragma once

#include <stdexcept>
#include <vector>

#include "aberrasim/core/types.hpp"

namespace aberrasim {

/// H x W x C image in [0,1] linear intensity, stored as one Eigen plane
/// per channel (row = y, col = x).
template <typename T>
struct ImageBuffer {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<Plane<T>> planes;

  ImageBuffer() = default;
  ImageBuffer(int h, int w, int c, T fill = T(0))
      : height(h), width(w), channels(c) {
    planes.assign(c, Plane<T>::Constant(h, w, fill));
  }

  bool same_shape(const ImageBuffer& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  void clamp01() {
    for (auto& p : planes) p = p.max(T(0)).min(T(1));
  }
};

/// Element-wise scalar conversion between buffer precisions.
template <typename To, typename From>
ImageBuffer<To> image_cast(const ImageBuffer<From>& src) {
  ImageBuffer<To> out;
  out.height = src.height;
  out.width = src.width;
  out.channels = src.channels;
  out.planes.reserve(src.planes.size());
  for (const auto& p : src.planes)
    out.planes.push_back(p.template cast<To>());
  return out;
}

/// Reflect (mirror-without-repeat) index into [0, n).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

}  // namespace aberrasim
