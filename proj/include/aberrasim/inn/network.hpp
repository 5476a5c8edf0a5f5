#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aberrasim/inn/block.hpp"

namespace aberrasim {

/// Multi-scale residual enhancement net used before the forward block
/// chain and after the inverse chain (separate weights each way):
/// 7x7/64 head, two residual blocks, a stride-2 down / nearest-up branch
/// with two more residual blocks and a skip join, a 3x3 projection back
/// to the image channels, and a global residual connection — so an
/// all-zero-weight extractor is the identity map.
template <typename T>
struct FeatureExtractor {
  static constexpr int kHidden = 64;
  ConvLayer<T> head;                    // in -> 64, 7x7
  ConvLayer<T> rb1a, rb1b, rb2a, rb2b;  // full-resolution residual blocks
  ConvLayer<T> down;                    // 64 -> 64, 3x3 stride 2
  ConvLayer<T> rb3a, rb3b, rb4a, rb4b;  // half-resolution residual blocks
  ConvLayer<T> up;                      // 64 -> 64, 3x3 after nearest x2
  ConvLayer<T> projection;              // 64 -> in, 3x3

  static FeatureExtractor make(int image_channels) {
    FeatureExtractor f;
    f.head = ConvLayer<T>::make(image_channels, kHidden, 7);
    f.rb1a = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.rb1b = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.rb2a = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.rb2b = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.down = ConvLayer<T>::make(kHidden, kHidden, 3, 2);
    f.rb3a = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.rb3b = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.rb4a = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.rb4b = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.up = ConvLayer<T>::make(kHidden, kHidden, 3);
    f.projection = ConvLayer<T>::make(kHidden, image_channels, 3);
    return f;
  }

  void init_he(std::uint64_t seed) {
    int i = 0;
    visit_layers([&](ConvLayer<T>& l) { l.init_he(mix_seed(seed, 31 + i++)); });
  }
  void init_zero() {
    visit_layers([](ConvLayer<T>& l) { l.init_zero(); });
  }

  template <typename Fn>
  void visit_layers(Fn&& fn) {
    fn(head), fn(rb1a), fn(rb1b), fn(rb2a), fn(rb2b), fn(down);
    fn(rb3a), fn(rb3b), fn(rb4a), fn(rb4b), fn(up), fn(projection);
  }
  template <typename Fn>
  void visit_layers(Fn&& fn) const {
    fn(head), fn(rb1a), fn(rb1b), fn(rb2a), fn(rb2b), fn(down);
    fn(rb3a), fn(rb3b), fn(rb4a), fn(rb4b), fn(up), fn(projection);
  }

  Tensor3<T> forward(const Tensor3<T>& x) const {
    if (x.height % 2 != 0 || x.width % 2 != 0)
      throw std::invalid_argument("FeatureExtractor: dims must be even");
    Tensor3<T> h = relu(head.forward(x));
    h = relu(add(h, rb1b.forward(relu(rb1a.forward(h)))));
    h = relu(add(h, rb2b.forward(relu(rb2a.forward(h)))));
    const Tensor3<T> skip = h;
    Tensor3<T> d = relu(down.forward(h));
    d = relu(add(d, rb3b.forward(relu(rb3a.forward(d)))));
    d = relu(add(d, rb4b.forward(relu(rb4a.forward(d)))));
    Tensor3<T> u = relu(up.forward(upsample2(d)));
    return add(x, projection.forward(add(skip, u)));
  }
};

/// Assembled conditional invertible network: a forward feature extractor,
/// k invertible blocks, and a distinct reverse feature extractor.  Only
/// the block chain is an exact bijection; the extractors are free-form
/// residual nets, so forward followed by inverse of the full pipeline is
/// not an identity by construction.
template <typename T>
struct ConditionalINN {
  int image_channels = 3;
  std::uint64_t seed = 0;  // construction seed, kept for provenance
  FeatureExtractor<T> forward_extractor;
  FeatureExtractor<T> reverse_extractor;
  std::vector<InvBlock<T>> blocks;

  static ConditionalINN make(int image_channels, int k,
                             std::uint64_t seed) {
    ConditionalINN net;
    net.image_channels = image_channels;
    net.seed = seed;
    net.forward_extractor = FeatureExtractor<T>::make(image_channels);
    net.forward_extractor.init_he(mix_seed(seed, 41));
    net.reverse_extractor = FeatureExtractor<T>::make(image_channels);
    net.reverse_extractor.init_he(mix_seed(seed, 42));
    net.blocks.reserve(k);
    for (int b = 0; b < k; ++b)
      net.blocks.push_back(
          InvBlock<T>::make(image_channels, mix_seed(seed, 100 + b)));
    return net;
  }

  /// Block chain only — the exactly invertible part.
  Tensor3<T> chain_forward(const Tensor3<T>& t, const ConditionCode& code,
                           T* log_det = nullptr) const {
    Tensor3<T> h = t;
    if (log_det) *log_det = T(0);
    for (const auto& block : blocks) {
      T bd = T(0);
      h = block.forward(h, code, log_det ? &bd : nullptr);
      if (log_det) *log_det += bd;
    }
    return h;
  }

  Tensor3<T> chain_inverse(const Tensor3<T>& t,
                           const ConditionCode& code) const {
    Tensor3<T> h = t;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
      h = it->inverse(h, code);
    return h;
  }

  Tensor3<T> forward(const Tensor3<T>& y, const ConditionCode& code) const {
    return chain_forward(forward_extractor.forward(y), code);
  }

  Tensor3<T> inverse(const Tensor3<T>& xhat,
                     const ConditionCode& code) const {
    return reverse_extractor.forward(chain_inverse(xhat, code));
  }
};

/// Degraded image -> restored estimate at distance d.
template <typename T>
Tensor3<T> inn_forward(const ConditionalINN<T>& net, const Tensor3<T>& y,
                       double d) {
  return net.forward(y, encode_condition(d));
}

/// Restored estimate -> re-degraded image at distance d.
template <typename T>
Tensor3<T> inn_inverse(const ConditionalINN<T>& net, const Tensor3<T>& xhat,
                       double d) {
  return net.inverse(xhat, encode_condition(d));
}

}  // namespace aberrasim
