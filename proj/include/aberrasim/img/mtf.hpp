#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "aberrasim/core/fft.hpp"
#include "aberrasim/img/image.hpp"
#include "aberrasim/wavefront/psf.hpp"

namespace aberrasim {

/// Modulation transfer curve: modulation over spatial frequency in
/// cycles/pixel, monotone frequency axis, modulation(0) = 1.
struct MtfCurve {
  std::vector<double> frequency;
  std::vector<double> modulation;
};

/// Radially collapsed magnitude of the kernel's DFT.  The kernel is
/// zero-embedded into a grid of at least 128 samples per side, so the
/// frequency axis is finely resolved; bins sharing the same radius are
/// averaged; the curve is normalized to 1 at zero frequency and reported
/// up to the Nyquist frequency 0.5 cycles/pixel.
template <typename T>
MtfCurve mtf_from_psf(const PSFKernel<T>& kernel) {
  int N = 128;
  while (N < kernel.size + 1) N *= 2;
  PlaneCd padded = PlaneCd::Zero(N, N);
  const int off = (N - kernel.size) / 2;
  for (int r = 0; r < kernel.size; ++r)
    for (int c = 0; c < kernel.size; ++c)
      padded(off + r, off + c) =
          std::complex<double>(static_cast<double>(kernel.values(r, c)), 0.0);
  const Planed mag = cfft2(padded).abs();
  const double dc = mag(N / 2, N / 2);
  if (!(dc > 0.0)) throw std::runtime_error("mtf_from_psf: zero kernel");

  // group by exact squared radius so equal frequencies collapse to one point
  std::map<long long, std::pair<double, int>> bins;
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) {
      const long long dy = r - N / 2, dx = c - N / 2;
      const long long r2 = dx * dx + dy * dy;
      if (4 * r2 > static_cast<long long>(N) * N) continue;  // beyond Nyquist
      auto& [sum, count] = bins[r2];
      sum += mag(r, c) / dc;
      ++count;
    }
  MtfCurve curve;
  curve.frequency.reserve(bins.size());
  curve.modulation.reserve(bins.size());
  for (const auto& [r2, acc] : bins) {
    curve.frequency.push_back(std::sqrt(static_cast<double>(r2)) / N);
    curve.modulation.push_back(acc.first / acc.second);
  }
  return curve;
}

/// First 0.5 crossing of the curve, linearly interpolated.  Without a
/// crossing the Nyquist frequency is returned and `no_crossing` set.
inline double mtf50(const MtfCurve& curve, bool* no_crossing = nullptr) {
  if (no_crossing) *no_crossing = false;
  if (curve.frequency.empty())
    throw std::invalid_argument("mtf50: empty curve");
  for (size_t i = 1; i < curve.frequency.size(); ++i) {
    const double m0 = curve.modulation[i - 1];
    const double m1 = curve.modulation[i];
    if (m0 >= 0.5 && m1 < 0.5) {
      const double f0 = curve.frequency[i - 1];
      const double f1 = curve.frequency[i];
      return f0 + (0.5 - m0) * (f1 - f0) / (m1 - m0);
    }
  }
  if (no_crossing) *no_crossing = true;
  return 0.5;
}

/// Rectangular region of interest in pixel coordinates.
struct Roi {
  int x = 0, y = 0, width = 0, height = 0;
};

/// Slanted-edge MTF: per-row edge centroids are fitted with a line, all
/// ROI pixels are projected onto the edge normal into a 4x-oversampled
/// edge-spread function, differentiated (central difference), Hamming
/// windowed about the line-spread peak and Fourier transformed.  The
/// finite-difference attenuation sin(2 pi f D)/(2 pi f D) is divided out.
/// Throws when the ROI holds no usable edge.
template <typename T>
MtfCurve slanted_edge_mtf(const ImageBuffer<T>& img, const Roi& roi) {
  if (roi.x < 0 || roi.y < 0 || roi.width < 8 || roi.height < 8 ||
      roi.x + roi.width > img.width || roi.y + roi.height > img.height)
    throw std::invalid_argument("slanted_edge_mtf: bad region of interest");

  // channel-averaged ROI
  Planed region = Planed::Zero(roi.height, roi.width);
  for (int ch = 0; ch < img.channels; ++ch)
    region += img.planes[ch]
                  .block(roi.y, roi.x, roi.height, roi.width)
                  .template cast<double>();
  region /= img.channels;

  // per-row edge position: centroid of the absolute row derivative
  std::vector<double> ys, xs;
  for (int r = 0; r < roi.height; ++r) {
    double wsum = 0.0, xsum = 0.0;
    for (int c = 0; c + 1 < roi.width; ++c) {
      const double d = std::abs(region(r, c + 1) - region(r, c));
      wsum += d;
      xsum += d * (c + 0.5);
    }
    if (wsum < 1e-6) continue;
    ys.push_back(r);
    xs.push_back(xsum / wsum);
  }
  if (ys.size() < roi.height / 2u)
    throw std::runtime_error("slanted_edge_mtf: no edge detected");

  // least-squares line x = m*y + b
  const size_t n = ys.size();
  double sy = 0, sx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sy += ys[i];
    sx += xs[i];
    syy += ys[i] * ys[i];
    sxy += ys[i] * xs[i];
  }
  const double denom = n * syy - sy * sy;
  if (std::abs(denom) < 1e-12)
    throw std::runtime_error("slanted_edge_mtf: degenerate edge fit");
  const double m = (n * sxy - sy * sx) / denom;
  const double b = (sx - m * sy) / n;
  const double cos_theta = 1.0 / std::sqrt(1.0 + m * m);

  // 4x-oversampled edge-spread function along the edge normal
  const double delta = 0.25;
  double umin = 1e30, umax = -1e30;
  for (int r = 0; r < roi.height; ++r)
    for (int c = 0; c < roi.width; ++c) {
      const double u = (c - (m * r + b)) * cos_theta;
      umin = std::min(umin, u);
      umax = std::max(umax, u);
    }
  const int nbins = static_cast<int>((umax - umin) / delta) + 1;
  std::vector<double> esf(nbins, 0.0);
  std::vector<int> count(nbins, 0);
  for (int r = 0; r < roi.height; ++r)
    for (int c = 0; c < roi.width; ++c) {
      const double u = (c - (m * r + b)) * cos_theta;
      const int k = static_cast<int>((u - umin) / delta);
      esf[k] += region(r, c);
      ++count[k];
    }
  for (int k = 0; k < nbins; ++k)
    if (count[k] > 0) esf[k] /= count[k];
  // fill empty bins from the nearest filled neighbours
  for (int k = 0; k < nbins; ++k) {
    if (count[k] > 0) continue;
    int lo = k - 1, hi = k + 1;
    while (lo >= 0 && count[lo] == 0) --lo;
    while (hi < nbins && count[hi] == 0) ++hi;
    if (lo >= 0 && hi < nbins)
      esf[k] = esf[lo] + (esf[hi] - esf[lo]) * (k - lo) / double(hi - lo);
    else if (lo >= 0)
      esf[k] = esf[lo];
    else if (hi < nbins)
      esf[k] = esf[hi];
  }

  // line-spread function, Hamming-windowed about its peak
  std::vector<double> lsf(nbins, 0.0);
  for (int k = 1; k + 1 < nbins; ++k)
    lsf[k] = (esf[k + 1] - esf[k - 1]) / (2.0 * delta);
  int peak = 0;
  for (int k = 0; k < nbins; ++k)
    if (std::abs(lsf[k]) > std::abs(lsf[peak])) peak = k;
  for (int k = 0; k < nbins; ++k) {
    const double phase = M_PI * (k - peak) / double(nbins);
    const double w = 0.54 + 0.46 * std::cos(2.0 * phase);
    lsf[k] *= w;
  }

  // discrete transform of the LSF; frequency axis is in cycles/pixel
  MtfCurve curve;
  double dc = 0.0;
  for (double v : lsf) dc += v;
  if (std::abs(dc) < 1e-12)
    throw std::runtime_error("slanted_edge_mtf: zero-contrast edge");
  const int nfreq = nbins / 2;
  for (int k = 0; k < nfreq; ++k) {
    const double f = k / (nbins * delta);
    if (f > 1.0) break;
    double re = 0.0, im = 0.0;
    for (int i = 0; i < nbins; ++i) {
      const double ang = -2.0 * M_PI * f * i * delta;
      re += lsf[i] * std::cos(ang);
      im += lsf[i] * std::sin(ang);
    }
    double mod = std::hypot(re, im) / std::abs(dc);
    if (k > 0) {
      const double arg = 2.0 * M_PI * f * delta;
      const double sinc = std::sin(arg) / arg;
      if (sinc > 0.05) mod /= sinc;
    }
    curve.frequency.push_back(f);
    curve.modulation.push_back(mod);
  }
  if (!curve.modulation.empty()) {
    const double m0 = curve.modulation.front();
    for (double& v : curve.modulation) v /= m0;
  }
  return curve;
}

}  // namespace aberrasim
