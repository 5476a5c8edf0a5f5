#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aberrasim/optics/trace.hpp"

namespace aberrasim {

namespace detail {

/// Stop-plane (x, y) of a ray launched from `origin` with slopes (a, b);
/// apertures are ignored so the search may roam outside them.  NaN when
/// the partial trace fails geometrically.
template <typename T>
Vec2<T> stop_hit(const LensPrescription<T>& prescription, const Vec3<T>& origin,
                 T a, T b, T lambda_nm) {
  Ray<T> ray{origin, Vec3<T>(a, b, T(1)).normalized(), T(0)};
  TraceOptions options;
  options.apply_apertures = false;
  options.stop_after = prescription.stop_index;
  TraceResult<T> result = trace_ray(prescription, ray, lambda_nm, options);
  if (result.vignetted || result.hit_points.empty()) {
    const T nan = std::numeric_limits<T>::quiet_NaN();
    return Vec2<T>(nan, nan);
  }
  return result.hit_points.back().template head<2>();
}

}  // namespace detail

/// Ray from a field point through the center of the aperture stop, found
/// by damped Newton iteration on the launch slopes with a finite-difference
/// 2x2 Jacobian.  Converges to a stop-center miss distance below 1e-8 mm;
/// throws std::runtime_error after 50 iterations without convergence.
template <typename T>
Ray<T> find_chief_ray(const LensPrescription<T>& prescription,
                      const Vec3<T>& field_point, T lambda_nm) {
  const T z_stop = prescription.vertex_z(prescription.stop_index);
  const T dz = z_stop - field_point.z();
  T a = -field_point.x() / dz;
  T b = -field_point.y() / dz;

  const T tol = T(1e-8);
  const T step = T(1e-7);
  for (int it = 0; it < 50; ++it) {
    const Vec2<T> f = detail::stop_hit(prescription, field_point, a, b,
                                       lambda_nm);
    if (!f.allFinite())
      throw std::runtime_error("find_chief_ray: trace failed during search");
    if (f.norm() < tol)
      return Ray<T>{field_point, Vec3<T>(a, b, T(1)).normalized(), T(0)};

    const Vec2<T> fa =
        detail::stop_hit(prescription, field_point, a + step, b, lambda_nm);
    const Vec2<T> fb =
        detail::stop_hit(prescription, field_point, a, b + step, lambda_nm);
    if (!fa.allFinite() || !fb.allFinite())
      throw std::runtime_error("find_chief_ray: trace failed during search");
    Eigen::Matrix<T, 2, 2> J;
    J.col(0) = (fa - f) / step;
    J.col(1) = (fb - f) / step;
    if (std::abs(J.determinant()) < T(1e-20))
      throw std::runtime_error("find_chief_ray: singular aiming Jacobian");
    const Vec2<T> delta = J.inverse() * f;
    a -= delta.x();
    b -= delta.y();
  }
  throw std::runtime_error("find_chief_ray: no convergence in 50 iterations");
}

}  // namespace aberrasim
