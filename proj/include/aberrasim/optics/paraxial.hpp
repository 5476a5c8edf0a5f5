#pragma once

#include <cmath>

#include "aberrasim/optics/chief_ray.hpp"
#include "aberrasim/optics/trace.hpp"

namespace aberrasim {

/// First-order quantities of a prescription at one wavelength, obtained
/// from real traces with infinitesimal field height and aperture so that
/// aberrations are negligible.  Pupil positions and radii are properties
/// of the lens alone; image position and magnification refer to the
/// design (in-focus) object plane.
template <typename T>
struct ParaxialData {
  T z_image = T(0);           // axial crossing of the marginal ray, mm
  T magnification = T(0);     // image height / object height (signed)
  T z_entrance_pupil = T(0);  // stop image in object space, mm
  T r_entrance_pupil = T(0);  // mm
  T z_exit_pupil = T(0);      // stop image in image space, mm
  T r_exit_pupil = T(0);      // mm
  T n_image = T(1);           // refractive index in image space
};

template <typename T>
ParaxialData<T> paraxial_solve(const LensPrescription<T>& prescription,
                               T lambda_nm) {
  ParaxialData<T> out;
  const T z_obj = prescription.object_z();
  const T z_img_plane = prescription.image_plane_z();
  TraceOptions no_clip;
  no_clip.apply_apertures = false;

  // image space index: after the last refracting surface
  for (const auto& s : prescription.surfaces)
    if (s.refracts()) out.n_image = s.index_at(lambda_nm);

  // --- marginal ray: axial object point, infinitesimal slope ---
  const T u = T(1e-6);
  Ray<T> marginal{Vec3<T>(0, 0, z_obj), Vec3<T>(u, 0, T(1)).normalized(),
                  T(0)};
  TraceOptions to_stop = no_clip;
  to_stop.stop_after = prescription.stop_index;
  const TraceResult<T> m_stop =
      trace_ray(prescription, marginal, lambda_nm, to_stop);
  const T x_at_stop = m_stop.hit_points.back().x();

  TraceOptions to_last = no_clip;
  to_last.stop_after = static_cast<int>(prescription.surfaces.size()) - 2;
  const TraceResult<T> m_exit =
      trace_ray(prescription, marginal, lambda_nm, to_last);
  const Vec3<T> mp = m_exit.hit_points.back();
  const Vec3<T> md = m_exit.exit_direction;
  out.z_image = mp.z() - mp.x() * md.z() / md.x();

  // --- chief ray: infinitesimal field height through the stop center ---
  const T h = T(1e-3);
  const Ray<T> chief =
      find_chief_ray(prescription, Vec3<T>(h, 0, z_obj), lambda_nm);
  // object-space segment crosses the axis at the entrance pupil
  out.z_entrance_pupil =
      z_obj - h * chief.direction.z() / chief.direction.x();
  const TraceResult<T> c_exit =
      trace_ray(prescription, chief, lambda_nm, to_last);
  const Vec3<T> cp = c_exit.hit_points.back();
  const Vec3<T> cd = c_exit.exit_direction;
  out.z_exit_pupil = cp.z() - cp.x() * cd.z() / cd.x();
  // continue the chief ray to the image plane for the magnification
  const T x_img = cp.x() + (z_img_plane - cp.z()) * cd.x() / cd.z();
  out.magnification = x_img / h;

  // pupil radii: scale the infinitesimal marginal ray so it passes the
  // stop edge, then read its height at each pupil plane
  const T r_stop = prescription.surfaces[prescription.stop_index].semi_diameter;
  const T scale = r_stop / std::abs(x_at_stop);
  out.r_entrance_pupil =
      std::abs(u * (out.z_entrance_pupil - z_obj)) * scale;
  const T x_xp = mp.x() + (out.z_exit_pupil - mp.z()) * md.x() / md.z();
  out.r_exit_pupil = std::abs(x_xp) * scale;
  return out;
}

}  // namespace aberrasim
