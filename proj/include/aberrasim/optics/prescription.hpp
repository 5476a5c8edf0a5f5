#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "aberrasim/optics/surface.hpp"

namespace aberrasim {

/// One design wavelength with its color-channel assignment and weight.
template <typename T>
struct DesignWavelength {
  T nm = T(587.6);
  int channel = 0;  // 0 = R, 1 = G, 2 = B (or 0 for mono)
  T weight = T(1);
};

/// Ordered surface list from object space to the image plane, plus the
/// stop position, the design wavelengths and sensor/object geometry.
template <typename T>
struct LensPrescription {
  std::vector<Surface<T>> surfaces;
  int stop_index = -1;
  std::vector<DesignWavelength<T>> wavelengths;
  T object_distance = T(1e4);  // mm, first vertex to in-focus object plane
  T pixel_pitch = T(0.005);    // mm, simulated sensor pitch

  int channel_count() const {
    int c = 0;
    for (const auto& w : wavelengths) c = std::max(c, w.channel + 1);
    return c;
  }

  /// Global z of surface i's vertex; surface 0 sits at z = 0.
  T vertex_z(int i) const {
    T z = T(0);
    for (int k = 0; k < i; ++k) z += surfaces[k].thickness;
    return z;
  }

  T image_plane_z() const {
    return vertex_z(static_cast<int>(surfaces.size()) - 1);
  }

  /// In-focus object plane shifted by d (positive d moves it farther).
  T object_z(T d = T(0)) const { return -(object_distance + d); }
};

/// Structural validation; throws std::invalid_argument with the offending
/// field named.  Parsing from JSON performs this after field checks.
template <typename T>
void validate(const LensPrescription<T>& p) {
  if (p.surfaces.empty())
    throw std::invalid_argument("surfaces: prescription has no surfaces");
  int stops = 0;
  for (size_t i = 0; i < p.surfaces.size(); ++i) {
    const auto& s = p.surfaces[i];
    if (s.kind == SurfaceKind::Stop) ++stops;
    if (s.kind == SurfaceKind::Spherical && !s.aspheric.empty())
      throw std::invalid_argument(
          "surfaces[" + std::to_string(i) +
          "].aspheric: spherical surface must not carry aspheric terms");
    for (const auto& [order, coeff] : s.aspheric) {
      (void)coeff;
      if (order < 2 || order % 2 != 0 || order > 12)
        throw std::invalid_argument(
            "surfaces[" + std::to_string(i) +
            "].aspheric: orders must be even, between 2 and 12");
    }
    if (s.refracts() && !(s.semi_diameter > T(0)))
      throw std::invalid_argument(
          "surfaces[" + std::to_string(i) +
          "].semi_diameter: must be > 0 for refracting surfaces");
    for (const auto& [nm, n] : s.index_after) {
      (void)nm;
      if (!(n > T(0)))
        throw std::invalid_argument("surfaces[" + std::to_string(i) +
                                    "].index: refractive index must be > 0");
    }
  }
  if (stops != 1)
    throw std::invalid_argument("stop_index: exactly one stop surface required");
  if (p.stop_index < 0 ||
      p.stop_index >= static_cast<int>(p.surfaces.size()) ||
      p.surfaces[p.stop_index].kind != SurfaceKind::Stop)
    throw std::invalid_argument("stop_index: does not point at the stop surface");
  if (p.surfaces.back().kind != SurfaceKind::ImagePlane)
    throw std::invalid_argument("surfaces: last surface must be the image plane");
  if (p.wavelengths.empty())
    throw std::invalid_argument("wavelengths: at least one design wavelength");
  std::vector<T> channel_weight(p.channel_count(), T(0));
  for (const auto& w : p.wavelengths) {
    if (w.channel < 0)
      throw std::invalid_argument("wavelengths.channel: must be >= 0");
    channel_weight[w.channel] += w.weight;
  }
  for (size_t c = 0; c < channel_weight.size(); ++c)
    if (std::abs(channel_weight[c] - T(1)) > T(1e-9))
      throw std::invalid_argument("wavelengths.weight: channel " +
                                  std::to_string(c) + " weights must sum to 1");
  if (!(p.pixel_pitch > T(0)))
    throw std::invalid_argument("pixel_pitch: must be > 0");
  if (!(p.object_distance > T(0)))
    throw std::invalid_argument("object_distance: must be > 0");
}

}  // namespace aberrasim
