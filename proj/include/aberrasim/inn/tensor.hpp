#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aberrasim/core/random.hpp"

namespace aberrasim {

/// Dense C x H x W feature tensor, channel-major storage.
template <typename T>
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;  // index (c * height + y) * width + x

  Tensor3() = default;
  Tensor3(int c, int h, int w, T fill = T(0))
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, fill) {}

  T& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  T at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  size_t size() const { return data.size(); }

  bool same_shape(const Tensor3& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  /// Channels [c0, c0+count) as a new tensor.
  Tensor3 slice_channels(int c0, int count) const {
    Tensor3 out(count, height, width);
    std::copy(data.begin() + static_cast<size_t>(c0) * height * width,
              data.begin() + static_cast<size_t>(c0 + count) * height * width,
              out.data.begin());
    return out;
  }

  static Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
    if (a.height != b.height || a.width != b.width)
      throw std::invalid_argument("concat_channels: spatial shape mismatch");
    Tensor3 out(a.channels + b.channels, a.height, a.width);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
    return out;
  }

  static Tensor3 random_normal(int c, int h, int w, std::uint64_t seed,
                               T stddev = T(1)) {
    Tensor3 out(c, h, w);
    NormalSampler normal(seed);
    for (auto& v : out.data) v = static_cast<T>(normal()) * stddev;
    return out;
  }
};

}  // namespace aberrasim
