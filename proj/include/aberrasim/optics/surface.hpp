#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aberrasim/core/types.hpp"

namespace aberrasim {

enum class SurfaceKind { Spherical, Aspheric, Stop, ImagePlane };

/// One surface of a sequential prescription.  Geometry lives in a local
/// frame with the vertex at z=0; the global vertex position follows from
/// the accumulated thicknesses.  `index_after` tabulates the refractive
/// index of the medium following the surface; an empty table means air.
template <typename T>
struct Surface {
  SurfaceKind kind = SurfaceKind::Spherical;
  T curvature = T(0);                         // 1/mm, 0 = plane
  std::vector<std::pair<int, T>> aspheric;    // (even order j >= 2, M_j)
  T semi_diameter = T(0);                     // mm, clear aperture radius
  T thickness = T(0);                         // mm, vertex to next vertex
  std::vector<std::pair<T, T>> index_after;   // (wavelength nm, n), sorted

  bool refracts() const {
    return kind == SurfaceKind::Spherical || kind == SurfaceKind::Aspheric;
  }

  /// Index of the medium after this surface, linearly interpolated in
  /// wavelength; clamped at the table ends; empty table = air (n = 1).
  T index_at(T lambda_nm) const {
    if (index_after.empty()) return T(1);
    if (index_after.size() == 1) return index_after.front().second;
    if (lambda_nm <= index_after.front().first)
      return index_after.front().second;
    if (lambda_nm >= index_after.back().first) return index_after.back().second;
    auto hi = std::upper_bound(
        index_after.begin(), index_after.end(), lambda_nm,
        [](T v, const std::pair<T, T>& e) { return v < e.first; });
    auto lo = hi - 1;
    T f = (lambda_nm - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
  }
};

/// Sagittal surface height z(s) = c s^2 / (1 + sqrt(1 - c^2 s^2)) + sum M_j s^j.
/// Throws std::domain_error beyond the hemispheric limit c^2 s^2 >= 1.
template <typename T>
T sag(const Surface<T>& surface, T s) {
  const T c = surface.curvature;
  const T c2s2 = c * c * s * s;
  if (c2s2 >= T(1)) throw std::domain_error("sag: point beyond hemisphere");
  T z = c * s * s / (T(1) + std::sqrt(T(1) - c2s2));
  const T s2 = s * s;
  for (const auto& [order, coeff] : surface.aspheric) {
    T p = T(1);
    for (int k = 0; k < order / 2; ++k) p *= s2;
    z += coeff * p;
  }
  return z;
}

/// dz/ds of the sag.  Spherical part: c s / sqrt(1 - c^2 s^2).
template <typename T>
T sag_slope(const Surface<T>& surface, T s) {
  const T c = surface.curvature;
  const T c2s2 = c * c * s * s;
  if (c2s2 >= T(1)) throw std::domain_error("sag_slope: beyond hemisphere");
  T dz = c * s / std::sqrt(T(1) - c2s2);
  for (const auto& [order, coeff] : surface.aspheric) {
    T p = T(1);
    for (int k = 0; k < order - 1; ++k) p *= s;
    dz += coeff * T(order) * p;
  }
  return dz;
}

/// Outward (toward +z) unit normal at a point on the surface, local frame.
template <typename T>
Vec3<T> surface_normal(const Surface<T>& surface, T x, T y) {
  const T s = std::hypot(x, y);
  if (s <= T(0)) return Vec3<T>(0, 0, 1);
  const T slope = sag_slope(surface, s);
  Vec3<T> n(-slope * x / s, -slope * y / s, T(1));
  return n.normalized();
}

}  // namespace aberrasim
