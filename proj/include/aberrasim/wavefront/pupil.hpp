#pragma once

#include <cmath>
#include <complex>

#include "aberrasim/optics/chief_ray.hpp"
#include "aberrasim/optics/paraxial.hpp"
#include "aberrasim/optics/trace.hpp"

namespace aberrasim {

/// Wavefront samples over the exit pupil for one field point and one
/// wavelength.  `opd` is the optical path difference to the chief ray,
/// referenced to a sphere centred on the chief ray's sensor-plane hit;
/// `amplitude` is the binary transmission mask (0 where vignetted).
/// The trailing fields carry the geometry needed to turn the map into a
/// physically sampled point-spread function.
template <typename T>
struct PupilMap {
  int n = 0;                  // samples per side (even)
  Plane<T> opd;               // n x n, mm; 0 where vignetted
  Plane<T> amplitude;         // n x n in [0,1]
  T lambda_nm = T(0);

  T sample_spacing = T(0);    // mm between samples at the exit pupil
  T ref_radius = T(0);        // mm, exit pupil to chief image point
  Vec3<T> chief_image = Vec3<T>::Zero();  // chief hit on the sensor plane
  T n_image = T(1);
  int launched_in_disc = 0;   // aim points inside the entrance-pupil disc
  int transmitted_in_disc = 0;
};

/// Fraction of the aim square's half-width kept beyond the nominal
/// entrance-pupil radius, so the mask edge is resolved by the grid rather
/// than clipped by it.
inline constexpr double kPupilAimMargin = 1.04;

/// Traces an n x n grid of rays from the field point (transverse object
/// coordinates at the plane shifted by d) toward the entrance pupil and
/// accumulates OPD against the chief ray on the reference sphere.
template <typename T>
PupilMap<T> sample_exit_pupil(const LensPrescription<T>& prescription,
                              const Vec2<T>& field, T d, T lambda_nm, int n,
                              const ParaxialData<T>* paraxial = nullptr) {
  ParaxialData<T> local_par;
  if (!paraxial) {
    local_par = paraxial_solve(prescription, lambda_nm);
    paraxial = &local_par;
  }
  const T z_obj = prescription.object_z(d);
  const Vec3<T> obj(field.x(), field.y(), z_obj);

  // chief ray and its reference geometry
  const Ray<T> chief = find_chief_ray(prescription, obj, lambda_nm);
  const TraceResult<T> chief_trace = trace_ray(prescription, chief, lambda_nm);
  if (chief_trace.vignetted)
    throw std::runtime_error("sample_exit_pupil: chief ray vignetted");
  const Vec3<T> Q = chief_trace.hit_points.back();
  const Vec3<T> exit_dir = chief_trace.exit_direction;
  const Vec3<T> chief_at_xp =
      Q + (paraxial->z_exit_pupil - Q.z()) / exit_dir.z() * exit_dir;
  const T R = (Q - chief_at_xp).norm();
  const T n_img = paraxial->n_image;
  // the chief ray crosses the reference sphere a distance R before Q
  const T chief_ref_opl = chief_trace.opl - n_img * R;

  PupilMap<T> map;
  map.n = n;
  map.lambda_nm = lambda_nm;
  map.opd = Plane<T>::Zero(n, n);
  map.amplitude = Plane<T>::Zero(n, n);
  map.ref_radius = R;
  map.chief_image = Q;
  map.n_image = n_img;
  const T r_aim = T(kPupilAimMargin) * paraxial->r_entrance_pupil;
  map.sample_spacing =
      T(2) * T(kPupilAimMargin) * paraxial->r_exit_pupil / T(n);

  for (int iy = 0; iy < n; ++iy) {
    const T py = (T(2 * iy + 1 - n) / T(n)) * r_aim;
    for (int ix = 0; ix < n; ++ix) {
      const T px = (T(2 * ix + 1 - n) / T(n)) * r_aim;
      const bool in_disc =
          px * px + py * py <=
          paraxial->r_entrance_pupil * paraxial->r_entrance_pupil;
      if (in_disc) ++map.launched_in_disc;

      const Vec3<T> aim(px, py, paraxial->z_entrance_pupil);
      Ray<T> ray{obj, (aim - obj).normalized(), T(0)};
      const TraceResult<T> tr = trace_ray(prescription, ray, lambda_nm);
      if (tr.vignetted) continue;  // amplitude stays 0

      // walk from the sensor hit back along the exit segment to the
      // reference sphere (the crossing on the pupil side of Q)
      const Vec3<T> p_img = tr.hit_points.back();
      const Vec3<T> w = p_img - Q;
      const T wd = w.dot(tr.exit_direction);
      const T disc = wd * wd - w.squaredNorm() + R * R;
      if (disc < T(0)) continue;  // cannot reach the sphere: treat as lost
      const T tau = -wd - std::sqrt(disc);
      const T opl_sphere = tr.opl + n_img * tau;

      map.amplitude(iy, ix) = T(1);
      map.opd(iy, ix) = opl_sphere - chief_ref_opl;
      if (in_disc) ++map.transmitted_in_disc;
    }
  }
  return map;
}

/// Complex pupil function P = A exp(j 2*pi/lambda * phi); wavelength is
/// converted to millimetres here so phase and OPD share units.
template <typename T>
PlaneC<T> pupil_function(const PupilMap<T>& map) {
  const T lambda_mm = map.lambda_nm * T(1e-6);
  const T k = T(2) * T(M_PI) / lambda_mm;
  PlaneC<T> P(map.n, map.n);
  for (int r = 0; r < map.n; ++r)
    for (int c = 0; c < map.n; ++c)
      P(r, c) = std::polar(map.amplitude(r, c), k * map.opd(r, c));
  return P;
}

}  // namespace aberrasim
