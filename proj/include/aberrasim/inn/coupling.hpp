#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "aberrasim/inn/subnet.hpp"

namespace aberrasim {

/// 7-bit binary encoding of the object-distance index.
struct ConditionCode {
  std::array<int, 7> bits{};  // big-endian: bits[0] is the 64s place

  int to_index() const {
    int v = 0;
    for (int b : bits) v = v * 2 + b;
    return v;
  }
};

/// Maps d in [-125, 125] mm (2.5 mm lattice) to its 7-bit code:
/// index = round((d + 125) / 2.5) in [0, 100], big-endian bits.  Off-
/// lattice distances snap to the nearest index; `snapped` reports that.
/// Out-of-range d throws std::domain_error.
inline ConditionCode encode_condition(double d, bool* snapped = nullptr) {
  if (d < -125.0 || d > 125.0)
    throw std::domain_error("encode_condition: d outside [-125, 125] mm");
  const double exact = (d + 125.0) / 2.5;
  const int index = static_cast<int>(std::lround(exact));
  if (snapped) *snapped = std::abs(exact - index) > 1e-9;
  ConditionCode code;
  for (int b = 0; b < 7; ++b) code.bits[b] = (index >> (6 - b)) & 1;
  return code;
}

/// Parameters of one conditional affine coupling layer over C channels
/// (split into halves).  psi sees the second half concatenated with the 7
/// constant condition planes; the other three nets see plain halves.
template <typename T>
struct CouplingParams {
  int channels = 0;        // full channel count C (even)
  T clamp_alpha = T(2);    // scale outputs pass through alpha * tanh(.)
  CouplingSubnet<T> psi;   // (C/2 + 7) -> C/2, scale of the first half
  CouplingSubnet<T> phi;   // C/2 -> C/2, shift of the first half
  CouplingSubnet<T> rho;   // C/2 -> C/2, scale of the second half
  CouplingSubnet<T> eta;   // C/2 -> C/2, shift of the second half

  static CouplingParams make(int channels) {
    if (channels % 2 != 0)
      throw std::invalid_argument("CouplingParams: channel count must be even");
    CouplingParams p;
    p.channels = channels;
    const int half = channels / 2;
    p.psi = CouplingSubnet<T>::make(half + 7, half);
    p.phi = CouplingSubnet<T>::make(half, half);
    p.rho = CouplingSubnet<T>::make(half, half);
    p.eta = CouplingSubnet<T>::make(half, half);
    return p;
  }

  void init_he(std::uint64_t seed) {
    psi.init_he(mix_seed(seed, 11));
    phi.init_he(mix_seed(seed, 12));
    rho.init_he(mix_seed(seed, 13));
    eta.init_he(mix_seed(seed, 14));
  }

  void init_zero() {
    psi.init_zero();
    phi.init_zero();
    rho.init_zero();
    eta.init_zero();
  }
};

namespace detail {

/// Appends the 7 condition bits as constant planes.
template <typename T>
Tensor3<T> with_condition(const Tensor3<T>& t, const ConditionCode& code) {
  Tensor3<T> planes(7, t.height, t.width);
  for (int b = 0; b < 7; ++b) {
    const T v = static_cast<T>(code.bits[b]);
    for (int y = 0; y < t.height; ++y)
      for (int x = 0; x < t.width; ++x) planes.at(b, y, x) = v;
  }
  return Tensor3<T>::concat_channels(t, planes);
}

/// alpha * tanh of every element: bounds the log-scales so exp stays
/// well-conditioned while keeping the transform exactly invertible.
template <typename T>
Tensor3<T> clamp_scale(const Tensor3<T>& t, T alpha) {
  Tensor3<T> out = t;
  for (auto& v : out.data) v = alpha * std::tanh(v);
  return out;
}

}  // namespace detail

/// Forward conditional affine coupling:
///   u1' = u1 .* exp(s1) + phi(u2),   s1 = clamp(psi(u2, h))
///   u2' = u2 .* exp(s2) + eta(u1'),  s2 = clamp(rho(u1'))
/// Returns the concatenated halves; `log_det` (optional) receives
/// sum(s1) + sum(s2), the exact log-Jacobian-determinant.
template <typename T>
Tensor3<T> coupling_forward(const Tensor3<T>& u, const ConditionCode& code,
                            const CouplingParams<T>& params,
                            T* log_det = nullptr) {
  if (u.channels != params.channels || u.channels % 2 != 0)
    throw std::invalid_argument("coupling_forward: bad channel count");
  const int half = u.channels / 2;
  const Tensor3<T> u1 = u.slice_channels(0, half);
  const Tensor3<T> u2 = u.slice_channels(half, half);

  const Tensor3<T> s1 = detail::clamp_scale(
      params.psi.forward(detail::with_condition(u2, code)),
      params.clamp_alpha);
  const Tensor3<T> t1 = params.phi.forward(u2);
  Tensor3<T> u1p = u1;
  for (size_t i = 0; i < u1p.data.size(); ++i)
    u1p.data[i] = u1.data[i] * std::exp(s1.data[i]) + t1.data[i];

  const Tensor3<T> s2 =
      detail::clamp_scale(params.rho.forward(u1p), params.clamp_alpha);
  const Tensor3<T> t2 = params.eta.forward(u1p);
  Tensor3<T> u2p = u2;
  for (size_t i = 0; i < u2p.data.size(); ++i)
    u2p.data[i] = u2.data[i] * std::exp(s2.data[i]) + t2.data[i];

  if (log_det) {
    T acc = T(0);
    for (T v : s1.data) acc += v;
    for (T v : s2.data) acc += v;
    *log_det = acc;
  }
  return Tensor3<T>::concat_channels(u1p, u2p);
}

/// Exact algebraic inverse of coupling_forward:
///   u2 = (u2' - eta(u1')) .* exp(-clamp(rho(u1')))
///   u1 = (u1' - phi(u2)) .* exp(-clamp(psi(u2, h)))
template <typename T>
Tensor3<T> coupling_inverse(const Tensor3<T>& up, const ConditionCode& code,
                            const CouplingParams<T>& params) {
  if (up.channels != params.channels || up.channels % 2 != 0)
    throw std::invalid_argument("coupling_inverse: bad channel count");
  const int half = up.channels / 2;
  const Tensor3<T> u1p = up.slice_channels(0, half);
  const Tensor3<T> u2p = up.slice_channels(half, half);

  const Tensor3<T> s2 =
      detail::clamp_scale(params.rho.forward(u1p), params.clamp_alpha);
  const Tensor3<T> t2 = params.eta.forward(u1p);
  Tensor3<T> u2 = u2p;
  for (size_t i = 0; i < u2.data.size(); ++i)
    u2.data[i] = (u2p.data[i] - t2.data[i]) * std::exp(-s2.data[i]);

  const Tensor3<T> s1 = detail::clamp_scale(
      params.psi.forward(detail::with_condition(u2, code)),
      params.clamp_alpha);
  const Tensor3<T> t1 = params.phi.forward(u2);
  Tensor3<T> u1 = u1p;
  for (size_t i = 0; i < u1.data.size(); ++i)
    u1.data[i] = (u1p.data[i] - t1.data[i]) * std::exp(-s1.data[i]);

  return Tensor3<T>::concat_channels(u1, u2);
}

}  // namespace aberrasim
