#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "aberrasim/optics/prescription.hpp"
#include "aberrasim/optics/surface.hpp"

namespace aberrasim {

/// Geometric ray with accumulated optical path length (n-weighted).
template <typename T>
struct Ray {
  Vec3<T> origin = Vec3<T>::Zero();
  Vec3<T> direction = Vec3<T>(0, 0, 1);  // unit
  T accumulated_opl = T(0);              // mm
};

enum class RayFate {
  Transmitted,
  Miss,                     // no geometric intersection
  Vignetted,                // hit outside the clear aperture
  TotalInternalReflection,  // Snell has no real solution
  NoConvergence             // aspheric iteration failed
};

/// Result of intersecting one surface in its local vertex frame.
template <typename T>
struct SurfaceHit {
  RayFate fate = RayFate::Miss;
  T t = T(0);            // ray parameter, mm
  Vec3<T> point = Vec3<T>::Zero();   // local coordinates (vertex at z=0)
  Vec3<T> normal = Vec3<T>(0, 0, 1);

  bool ok() const { return fate == RayFate::Transmitted; }
};

namespace detail {

/// Checks the clear aperture and fills the normal; `local` has the vertex
/// at the origin.
template <typename T>
SurfaceHit<T> finish_hit(const Surface<T>& surface, T t, const Vec3<T>& local,
                         bool apply_aperture) {
  SurfaceHit<T> hit;
  hit.t = t;
  hit.point = local;
  const T s = std::hypot(local.x(), local.y());
  if (apply_aperture && surface.semi_diameter > T(0) &&
      s > surface.semi_diameter) {
    hit.fate = RayFate::Vignetted;
    return hit;
  }
  hit.normal = surface.refracts() ? surface_normal(surface, local.x(), local.y())
                                  : Vec3<T>(0, 0, 1);
  hit.fate = RayFate::Transmitted;
  return hit;
}

}  // namespace detail

/// Analytic intersection with a spherical (or planar, c = 0) surface whose
/// vertex sits at z = vertex_z.  Substituting the ray into the sphere
/// equation c(x^2+y^2+z^2) - 2z = 0 (local frame) gives the quadratic
///   c t^2 + 2(c O.D - D_z) t + (c |O|^2 - 2 O_z) = 0;
/// of the two roots the physical one lies nearest the vertex tangent
/// plane, which also selects the correct hemisphere for concave surfaces.
template <typename T>
SurfaceHit<T> intersect_sphere(const Ray<T>& ray, const Surface<T>& surface,
                               T vertex_z, bool apply_aperture = true) {
  const Vec3<T> O = ray.origin - Vec3<T>(0, 0, vertex_z);
  const Vec3<T>& D = ray.direction;
  const T c = surface.curvature;

  const T a = c;
  const T b = T(2) * (c * O.dot(D) - D.z());
  const T c0 = c * O.squaredNorm() - T(2) * O.z();
  const T t_min = T(-1e-9);  // tolerate rounding at a coincident vertex

  SurfaceHit<T> miss;
  if (std::abs(a) < T(1e-16)) {  // plane
    if (std::abs(b) < T(1e-16)) return miss;
    const T t = -c0 / b;
    if (t < t_min) return miss;
    return detail::finish_hit(surface, t, O + t * D, apply_aperture);
  }
  const T disc = b * b - T(4) * a * c0;
  if (disc < T(0)) return miss;
  const T sq = std::sqrt(disc);
  // std::copysign keeps the subtraction cancellation-free
  const T q = T(-0.5) * (b + std::copysign(sq, b));
  T roots[2] = {q / a, (std::abs(q) > T(0) ? c0 / q : q / a)};
  T best_t = T(0);
  T best_z = std::numeric_limits<T>::infinity();
  for (T t : roots) {
    if (t < t_min) continue;
    const T z = O.z() + t * D.z();
    if (std::abs(z) < std::abs(best_z)) {
      best_z = z;
      best_t = t;
    }
  }
  if (!std::isfinite(best_z)) return miss;
  return detail::finish_hit(surface, best_t, O + best_t * D, apply_aperture);
}

/// Newton iteration on the sag residual g(t) = z(t) - sag(s(t)), seeded
/// from the base-sphere intersection, with a bisection fallback over a
/// bracket sized by the surface's sag range.  Converges to
/// |residual| < 1e-10 mm within 50 iterations.
template <typename T>
SurfaceHit<T> intersect_asphere(const Ray<T>& ray, const Surface<T>& surface,
                                T vertex_z, bool apply_aperture = true) {
  const Vec3<T> O = ray.origin - Vec3<T>(0, 0, vertex_z);
  const Vec3<T>& D = ray.direction;

  Surface<T> base = surface;
  base.aspheric.clear();
  SurfaceHit<T> seed = intersect_sphere(ray, base, vertex_z, false);
  if (seed.fate == RayFate::Miss) {
    // base sphere missed; fall back to the tangent plane for a seed
    base.curvature = T(0);
    seed = intersect_sphere(ray, base, vertex_z, false);
    if (seed.fate == RayFate::Miss) return seed;
  }

  const T tol = T(1e-10);
  auto residual = [&](T t) {
    const Vec3<T> p = O + t * D;
    const T s = std::hypot(p.x(), p.y());
    return p.z() - sag(surface, s);
  };

  T t = seed.t;
  bool converged = false;
  try {
    for (int it = 0; it < 50; ++it) {
      const Vec3<T> p = O + t * D;
      const T s = std::hypot(p.x(), p.y());
      const T g = p.z() - sag(surface, s);
      if (std::abs(g) < tol) {
        converged = true;
        break;
      }
      T dsdt = T(0);
      if (s > T(0)) dsdt = (p.x() * D.x() + p.y() * D.y()) / s;
      const T dg = D.z() - sag_slope(surface, s) * dsdt;
      if (std::abs(dg) < T(1e-14)) break;
      t -= g / dg;
    }
  } catch (const std::domain_error&) {
    converged = false;  // Newton stepped beyond the hemisphere
  }

  if (!converged) {
    // bracket around the seed by the surface's full sag excursion
    T range = std::abs(sag(surface, surface.semi_diameter > T(0)
                                        ? surface.semi_diameter
                                        : T(1)));
    range = std::max(range, T(1e-3));
    T lo = seed.t - T(2) * range, hi = seed.t + T(2) * range;
    auto safe_res = [&](T tt) {
      try {
        return residual(tt);
      } catch (const std::domain_error&) {
        return std::numeric_limits<T>::quiet_NaN();
      }
    };
    T flo = safe_res(lo), fhi = safe_res(hi);
    for (int grow = 0; grow < 8 && (!(flo * fhi < T(0)) ||
                                    !std::isfinite(flo) || !std::isfinite(fhi));
         ++grow) {
      lo -= range;
      hi += range;
      flo = safe_res(lo);
      fhi = safe_res(hi);
    }
    if (!(flo * fhi < T(0)) || !std::isfinite(flo) || !std::isfinite(fhi)) {
      SurfaceHit<T> fail;
      fail.fate = RayFate::NoConvergence;
      return fail;
    }
    for (int it = 0; it < 200; ++it) {
      const T mid = T(0.5) * (lo + hi);
      const T fm = safe_res(mid);
      if (!std::isfinite(fm)) break;
      if (std::abs(fm) < tol) {
        t = mid;
        converged = true;
        break;
      }
      if (flo * fm < T(0)) {
        hi = mid;
      } else {
        lo = mid;
        flo = fm;
      }
    }
    if (!converged) {
      SurfaceHit<T> fail;
      fail.fate = RayFate::NoConvergence;
      return fail;
    }
  }
  if (t < T(-1e-9)) return SurfaceHit<T>{};  // behind the ray: miss
  return detail::finish_hit(surface, t, O + t * D, apply_aperture);
}

template <typename T>
SurfaceHit<T> intersect(const Ray<T>& ray, const Surface<T>& surface,
                        T vertex_z, bool apply_aperture = true) {
  return surface.kind == SurfaceKind::Aspheric
             ? intersect_asphere(ray, surface, vertex_z, apply_aperture)
             : intersect_sphere(ray, surface, vertex_z, apply_aperture);
}

/// Vector form of Snell's law.  Returns false on total internal
/// reflection.  The normal may point to either side; it is re-oriented
/// against the incident direction internally.
template <typename T>
bool refract(const Vec3<T>& direction, const Vec3<T>& normal, T n1, T n2,
             Vec3<T>* out) {
  Vec3<T> n = direction.dot(normal) > T(0) ? Vec3<T>(-normal) : normal;
  const T ci = -direction.dot(n);
  const T mu = n1 / n2;
  const T sin2t = mu * mu * (T(1) - ci * ci);
  if (sin2t > T(1)) return false;
  const T ct = std::sqrt(T(1) - sin2t);
  *out = (mu * direction + (mu * ci - ct) * n).normalized();
  return true;
}

/// Trace outcome: hit points in global coordinates for every surface
/// reached, final direction and accumulated optical path length.  A
/// vignetted trace records which surface clipped it; it is a result, not
/// an error, because the pupil amplitude mask is built from these.
template <typename T>
struct TraceResult {
  std::vector<Vec3<T>> hit_points;
  Vec3<T> exit_direction = Vec3<T>(0, 0, 1);
  T opl = T(0);
  bool vignetted = false;
  int clip_surface = -1;
  RayFate fate = RayFate::Transmitted;

  bool ok() const { return !vignetted; }
};

struct TraceOptions {
  bool apply_apertures = true;
  int stop_after = -1;  // trace only surfaces [0, stop_after]; -1 = all
};

/// Sequential trace: intersect and refract at each surface in order,
/// accumulating n * (segment length).  The stop surface only clips; the
/// image plane terminates the trace.
template <typename T>
TraceResult<T> trace_ray(const LensPrescription<T>& prescription,
                         const Ray<T>& ray, T lambda_nm,
                         const TraceOptions& options = {}) {
  TraceResult<T> result;
  result.opl = ray.accumulated_opl;
  Vec3<T> pos = ray.origin;
  Vec3<T> dir = ray.direction;
  T n_current = T(1);
  T vz = T(0);

  const int last = options.stop_after >= 0
                       ? options.stop_after
                       : static_cast<int>(prescription.surfaces.size()) - 1;
  for (int i = 0; i <= last; ++i) {
    const Surface<T>& surface = prescription.surfaces[i];
    Ray<T> local{pos, dir, T(0)};
    SurfaceHit<T> hit =
        intersect(local, surface, vz, options.apply_apertures);
    if (!hit.ok()) {
      result.vignetted = true;
      result.clip_surface = i;
      result.fate = hit.fate;
      result.exit_direction = dir;
      return result;
    }
    const Vec3<T> global = hit.point + Vec3<T>(0, 0, vz);
    result.opl += n_current * (global - pos).norm();
    result.hit_points.push_back(global);
    pos = global;

    if (surface.refracts()) {
      const T n_next = surface.index_at(lambda_nm);
      if (n_next != n_current) {
        Vec3<T> refracted;
        if (!refract(dir, hit.normal, n_current, n_next, &refracted)) {
          result.vignetted = true;
          result.clip_surface = i;
          result.fate = RayFate::TotalInternalReflection;
          result.exit_direction = dir;
          return result;
        }
        dir = refracted;
      }
      n_current = n_next;
    }
    vz += surface.thickness;
  }
  result.exit_direction = dir;
  result.fate = RayFate::Transmitted;
  return result;
}

}  // namespace aberrasim
