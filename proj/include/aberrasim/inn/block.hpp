#pragma once

#include <cstdint>
#include <stdexcept>

#include "aberrasim/inn/coupling.hpp"
#include "aberrasim/inn/squeeze.hpp"

namespace aberrasim {

/// Per-pixel channel mixing by an invertible C x C matrix (the 1x1
/// convolution).  Rejects near-singular matrices.
template <typename T>
Tensor3<T> mix_channels(const Tensor3<T>& t,
                        const Eigen::Matrix<T, Eigen::Dynamic,
                                            Eigen::Dynamic>& W) {
  if (W.rows() != t.channels || W.cols() != t.channels)
    throw std::invalid_argument("mix_channels: matrix size mismatch");
  if (std::abs(W.determinant()) < T(1e-8))
    throw std::invalid_argument("mix_channels: matrix is singular");
  Tensor3<T> out(t.channels, t.height, t.width);
  const int hw = t.height * t.width;
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::Map<const Mat> X(t.data.data(), hw, t.channels);
  Eigen::Map<Mat> Y(out.data.data(), hw, t.channels);
  Y = X * W.transpose();
  return out;
}

template <typename T>
Tensor3<T> unmix_channels(const Tensor3<T>& t,
                          const Eigen::Matrix<T, Eigen::Dynamic,
                                              Eigen::Dynamic>& W) {
  if (std::abs(W.determinant()) < T(1e-8))
    throw std::invalid_argument("unmix_channels: matrix is singular");
  const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> Winv =
      W.partialPivLu().inverse();
  return mix_channels(t, Winv);
}

/// One invertible unit: squeeze -> 1x1 channel mixing -> conditional
/// coupling -> unsqueeze, so the tensor shape is preserved block to
/// block.  The mixing matrix is orthogonal at initialization (QR of
/// seeded Gaussian noise) and carries its cached inverse and log |det|.
template <typename T>
struct InvBlock {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Mat W;      // mixing over 4*C channels (post-squeeze)
  Mat W_inv;  // cached inverse
  T log_abs_det = T(0);
  CouplingParams<T> coupling;

  /// `channels` is the tensor channel count before the squeeze.
  static InvBlock make(int channels, std::uint64_t seed) {
    InvBlock block;
    const int mixed = channels * 4;
    block.coupling = CouplingParams<T>::make(mixed);
    block.coupling.init_he(mix_seed(seed, 21));

    Mat G(mixed, mixed);
    NormalSampler normal(mix_seed(seed, 22));
    for (int r = 0; r < mixed; ++r)
      for (int c = 0; c < mixed; ++c) G(r, c) = static_cast<T>(normal());
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ() * Mat::Identity(mixed, mixed);
    const Mat R = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (int c = 0; c < mixed; ++c)  // fix the sign ambiguity of QR
      if (R(c, c) < T(0)) Q.col(c) = -Q.col(c);
    block.set_mixing(Q);
    return block;
  }

  /// Computes the cached inverse in double precision regardless of T so
  /// the consistency bound is meaningful for single-precision weights.
  void set_mixing(const Mat& W_new) {
    const Eigen::MatrixXd Wd = W_new.template cast<double>();
    if (std::abs(Wd.determinant()) < 1e-8)
      throw std::invalid_argument("InvBlock: mixing matrix is singular");
    const Eigen::MatrixXd Wid = Wd.partialPivLu().inverse();
    const double err =
        (Wd * Wid - Eigen::MatrixXd::Identity(Wd.rows(), Wd.cols()))
            .array()
            .abs()
            .maxCoeff();
    if (err >= 1e-10)
      throw std::runtime_error("InvBlock: inverse check failed");
    W = W_new;
    W_inv = Wid.cast<T>();
    log_abs_det = static_cast<T>(std::log(std::abs(Wd.determinant())));
  }

  void init_zero_subnets() { coupling.init_zero(); }

  Tensor3<T> forward(const Tensor3<T>& t, const ConditionCode& code,
                     T* log_det = nullptr) const {
    Tensor3<T> h = squeeze(t);
    h = mix_channels(h, W);
    T cp_det = T(0);
    h = coupling_forward(h, code, coupling, log_det ? &cp_det : nullptr);
    if (log_det)
      *log_det = cp_det + T(h.height) * T(h.width) * log_abs_det;
    return unsqueeze(h);
  }

  Tensor3<T> inverse(const Tensor3<T>& t, const ConditionCode& code) const {
    Tensor3<T> h = squeeze(t);
    h = coupling_inverse(h, code, coupling);
    h = mix_channels(h, W_inv);
    return unsqueeze(h);
  }
};

}  // namespace aberrasim
