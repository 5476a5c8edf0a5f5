#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aberrasim/core/types.hpp"
#include "aberrasim/inn/tensor.hpp"

namespace aberrasim {

/// Zero-padded ("same") 2-D convolution layer with optional stride,
/// evaluated as im2col followed by one Eigen matrix product.
template <typename T>
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  std::vector<T> weight;  // index ((o * in_c + i) * k + ky) * k + kx
  std::vector<T> bias;    // out_channels

  static ConvLayer make(int in_c, int out_c, int k, int stride = 1) {
    ConvLayer layer;
    layer.in_channels = in_c;
    layer.out_channels = out_c;
    layer.kernel = k;
    layer.stride = stride;
    layer.weight.assign(static_cast<size_t>(out_c) * in_c * k * k, T(0));
    layer.bias.assign(out_c, T(0));
    return layer;
  }

  /// He-normal weights (stddev sqrt(2 / fan_in)), zero bias, deterministic
  /// under the seed.
  void init_he(std::uint64_t seed) {
    NormalSampler normal(seed);
    const T stddev =
        std::sqrt(T(2) / T(in_channels * kernel * kernel));
    for (auto& w : weight) w = static_cast<T>(normal()) * stddev;
    for (auto& b : bias) b = T(0);
  }

  void init_zero() {
    std::fill(weight.begin(), weight.end(), T(0));
    std::fill(bias.begin(), bias.end(), T(0));
  }

  Tensor3<T> forward(const Tensor3<T>& x) const {
    if (x.channels != in_channels)
      throw std::invalid_argument("ConvLayer: channel mismatch");
    const int pad = kernel / 2;
    const int oh = (x.height + stride - 1) / stride;
    const int ow = (x.width + stride - 1) / stride;
    const int patch = in_channels * kernel * kernel;

    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    Mat cols(patch, static_cast<Eigen::Index>(oh) * ow);
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const Eigen::Index col = static_cast<Eigen::Index>(oy) * ow + ox;
        int row = 0;
        for (int c = 0; c < in_channels; ++c)
          for (int ky = 0; ky < kernel; ++ky) {
            const int y = oy * stride + ky - pad;
            for (int kx = 0; kx < kernel; ++kx, ++row) {
              const int xx = ox * stride + kx - pad;
              cols(row, col) = (y >= 0 && y < x.height && xx >= 0 &&
                                xx < x.width)
                                   ? x.at(c, y, xx)
                                   : T(0);
            }
          }
      }
    }
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        Wm(weight.data(), out_channels, patch);
    Mat result = Wm * cols;  // out_channels x (oh*ow)

    Tensor3<T> out(out_channels, oh, ow);
    for (int o = 0; o < out_channels; ++o)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox)
          out.at(o, oy, ox) =
              result(o, static_cast<Eigen::Index>(oy) * ow + ox) + bias[o];
    return out;
  }
};

template <typename T>
Tensor3<T> relu(const Tensor3<T>& x) {
  Tensor3<T> out = x;
  for (auto& v : out.data) v = v > T(0) ? v : T(0);
  return out;
}

template <typename T>
Tensor3<T> add(const Tensor3<T>& a, const Tensor3<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
  Tensor3<T> out = a;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

/// Nearest-neighbour 2x upsampling.
template <typename T>
Tensor3<T> upsample2(const Tensor3<T>& x) {
  Tensor3<T> out(x.channels, x.height * 2, x.width * 2);
  for (int c = 0; c < x.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int xx = 0; xx < out.width; ++xx)
        out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
  return out;
}

}  // namespace aberrasim
