#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "aberrasim/inn/tensor.hpp"

namespace aberrasim {

/// Loss weights (forward, reverse, edge, perceptual).
template <typename T>
struct LossWeights {
  T forward = T(1);
  T reverse = T(0.5);
  T edge = T(0.05);
  T perceptual = T(0.02);
};

/// Mean absolute difference.
template <typename T>
T l1_mean(const Tensor3<T>& a, const Tensor3<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("l1_mean: shape mismatch");
  T acc = T(0);
  for (size_t i = 0; i < a.data.size(); ++i)
    acc += std::abs(a.data[i] - b.data[i]);
  return acc / static_cast<T>(a.data.size());
}

/// Restoration fidelity: mean L1 between the restored estimate and the
/// sharp reference.
template <typename T>
T loss_forward(const Tensor3<T>& x_hat, const Tensor3<T>& x) {
  return l1_mean(x_hat, x);
}

/// Re-degradation fidelity: mean L1 between the re-degraded estimate and
/// the observed degraded image.
template <typename T>
T loss_reverse(const Tensor3<T>& y_hat, const Tensor3<T>& y) {
  return l1_mean(y_hat, y);
}

/// 3x3 Laplacian [[0,1,0],[1,-4,1],[0,1,0]] with reflect padding.
template <typename T>
Tensor3<T> laplacian(const Tensor3<T>& t) {
  Tensor3<T> out(t.channels, t.height, t.width);
  auto ref = [](int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
  };
  for (int c = 0; c < t.channels; ++c)
    for (int y = 0; y < t.height; ++y)
      for (int x = 0; x < t.width; ++x)
        out.at(c, y, x) = t.at(c, ref(y - 1, t.height), x) +
                          t.at(c, ref(y + 1, t.height), x) +
                          t.at(c, y, ref(x - 1, t.width)) +
                          t.at(c, y, ref(x + 1, t.width)) -
                          T(4) * t.at(c, y, x);
  return out;
}

/// Edge-preservation term: mean L1 of the Laplacian-filtered difference.
template <typename T>
T loss_edge(const Tensor3<T>& x_hat, const Tensor3<T>& x) {
  return l1_mean(laplacian(x_hat), laplacian(x));
}

/// Host-supplied feature map for the perceptual term.
template <typename T>
using FeatureMapFn = std::function<Tensor3<T>(const Tensor3<T>&)>;

/// Feature-space L1 normalized by the feature grid size C*H*W.  Throws
/// when no extractor is supplied — the term is then unsupported and its
/// weight must be zero in loss_total.
template <typename T>
T loss_perceptual(const Tensor3<T>& x_hat, const Tensor3<T>& x,
                  const FeatureMapFn<T>& extractor) {
  if (!extractor)
    throw std::runtime_error(
        "loss_perceptual: no feature extractor supplied (unsupported)");
  return l1_mean(extractor(x_hat), extractor(x));
}

/// Weighted total of the four terms.  If no perceptual extractor is
/// available the perceptual weight must be zero.
template <typename T>
T loss_total(const Tensor3<T>& x_hat, const Tensor3<T>& x,
             const Tensor3<T>& y_hat, const Tensor3<T>& y,
             const FeatureMapFn<T>& extractor = nullptr,
             const LossWeights<T>& weights = {}) {
  T total = weights.forward * loss_forward(x_hat, x) +
            weights.reverse * loss_reverse(y_hat, y) +
            weights.edge * loss_edge(x_hat, x);
  if (weights.perceptual != T(0)) {
    if (!extractor)
      throw std::runtime_error(
          "loss_total: perceptual weight is nonzero but no extractor given");
    total += weights.perceptual * loss_perceptual(x_hat, x, extractor);
  }
  return total;
}

}  // namespace aberrasim
