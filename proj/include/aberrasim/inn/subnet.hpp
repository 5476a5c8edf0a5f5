#pragma once

#include <cstdint>

#include "aberrasim/inn/conv.hpp"

namespace aberrasim {

/// Transform net used inside the coupling layers: 7x7/32 head, two
/// residual blocks, 3x3 output projection to the requested channel count.
/// All layers preserve spatial dims.
template <typename T>
struct CouplingSubnet {
  static constexpr int kHidden = 32;
  ConvLayer<T> head;          // in -> 32, 7x7
  ConvLayer<T> rb1a, rb1b;    // 32 -> 32, 3x3
  ConvLayer<T> rb2a, rb2b;
  ConvLayer<T> projection;    // 32 -> out, 3x3

  static CouplingSubnet make(int in_c, int out_c) {
    CouplingSubnet net;
    net.head = ConvLayer<T>::make(in_c, kHidden, 7);
    net.rb1a = ConvLayer<T>::make(kHidden, kHidden, 3);
    net.rb1b = ConvLayer<T>::make(kHidden, kHidden, 3);
    net.rb2a = ConvLayer<T>::make(kHidden, kHidden, 3);
    net.rb2b = ConvLayer<T>::make(kHidden, kHidden, 3);
    net.projection = ConvLayer<T>::make(kHidden, out_c, 3);
    return net;
  }

  void init_he(std::uint64_t seed) {
    head.init_he(mix_seed(seed, 1));
    rb1a.init_he(mix_seed(seed, 2));
    rb1b.init_he(mix_seed(seed, 3));
    rb2a.init_he(mix_seed(seed, 4));
    rb2b.init_he(mix_seed(seed, 5));
    projection.init_he(mix_seed(seed, 6));
  }

  void init_zero() {
    head.init_zero();
    rb1a.init_zero();
    rb1b.init_zero();
    rb2a.init_zero();
    rb2b.init_zero();
    projection.init_zero();
  }

  Tensor3<T> forward(const Tensor3<T>& x) const {
    Tensor3<T> h = relu(head.forward(x));
    h = relu(add(h, rb1b.forward(relu(rb1a.forward(h)))));
    h = relu(add(h, rb2b.forward(relu(rb2a.forward(h)))));
    return projection.forward(h);
  }

  template <typename Fn>
  void visit_layers(Fn&& fn) {
    fn(head);
    fn(rb1a);
    fn(rb1b);
    fn(rb2a);
    fn(rb2b);
    fn(projection);
  }
  template <typename Fn>
  void visit_layers(Fn&& fn) const {
    fn(head);
    fn(rb1a);
    fn(rb1b);
    fn(rb2a);
    fn(rb2b);
    fn(projection);
  }
};

}  // namespace aberrasim
