#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aberrasim/wavefront/psf.hpp"

namespace aberrasim {

inline constexpr int kPatchGridSize = 32;  // patches per image side

/// Field-indexed set of point-spread kernels at one object-plane shift d,
/// one kernel per patch and channel, plus the relative-illuminance grid
/// (normalized so the central patches read 1).
template <typename T>
struct PSFGrid {
  T distance = T(0);  // mm, object-plane shift d
  int channels = 0;
  int kernel_size = 0;
  std::vector<PSFKernel<T>> kernels;  // index (ch * 32 + i) * 32 + j
  Plane<T> illuminance;               // 32 x 32 in (0, 1]

  const PSFKernel<T>& at(int channel, int i, int j) const {
    return kernels[(channel * kPatchGridSize + i) * kPatchGridSize + j];
  }
  PSFKernel<T>& at(int channel, int i, int j) {
    return kernels[(channel * kPatchGridSize + i) * kPatchGridSize + j];
  }
};

template <typename T>
struct PsfGridOptions {
  int pupil_samples = 128;  // rays per pupil side; bounds the resolvable blur
  int padding = 4;          // zero-pad factor for the pupil transform
  int kernel_size = 25;     // odd, sensor pixels
  int threads = 0;          // 0 = library default
};

enum class IlluminanceMode { RayStatistics, Cosine4 };

/// Field-dependent brightness relative to the on-axis value: transmitted
/// ray fraction over the entrance-pupil disc divided by the on-axis
/// fraction, or the cos^4 falloff of the field angle as a fallback.
template <typename T>
T relative_illuminance(const LensPrescription<T>& prescription,
                       const Vec2<T>& field, T d = T(0),
                       IlluminanceMode mode = IlluminanceMode::RayStatistics,
                       int pupil_samples = 32) {
  const T lambda = prescription.wavelengths.empty()
                       ? T(587.6)
                       : prescription.wavelengths.front().nm;
  const ParaxialData<T> par = paraxial_solve(prescription, lambda);
  if (mode == IlluminanceMode::Cosine4) {
    const T dz = par.z_entrance_pupil - prescription.object_z(d);
    const T ct = std::abs(dz) / std::hypot(field.norm(), dz);
    return ct * ct * ct * ct;
  }
  const PupilMap<T> off =
      sample_exit_pupil(prescription, field, d, lambda, pupil_samples, &par);
  const PupilMap<T> axis = sample_exit_pupil(prescription, Vec2<T>(0, 0), d,
                                             lambda, pupil_samples, &par);
  if (axis.transmitted_in_disc == 0)
    throw std::runtime_error(
        "relative_illuminance: on-axis pupil fully vignetted");
  const T f_off = T(off.transmitted_in_disc) / T(off.launched_in_disc);
  const T f_axis = T(axis.transmitted_in_disc) / T(axis.launched_in_disc);
  return std::min(T(1), f_off / f_axis);
}

namespace detail {

/// Polychromatic kernel for one patch.  Each wavelength's fine-sampled
/// PSF lives on a grid whose centre index N/2 maps to that wavelength's
/// chief image point; all of a channel's PSFs are area-resampled onto the
/// sensor-pitch window centred on the channel's combined energy centroid,
/// so lateral color within a channel is preserved.  The centroid's offset
/// from the patch centre is recorded, not baked into the kernel.
template <typename T>
PSFKernel<T> patch_kernel(
    const LensPrescription<T>& prescription, const Vec2<T>& field_obj,
    const Vec2<T>& patch_center_img, T d, int channel,
    const std::map<T, ParaxialData<T>>& paraxial_by_lambda,
    const PsfGridOptions<T>& options, T* transmission_accum) {
  struct FinePsf {
    Plane<T> intensity;
    T pitch;        // mm per fine sample
    Vec2<T> chief;  // physical position of grid centre index N/2
    T weight;
  };
  std::vector<FinePsf> fine;
  Vec2<T> ref = Vec2<T>::Zero();  // combined energy centroid, mm
  T wsum = T(0);

  for (const auto& wl : prescription.wavelengths) {
    if (wl.channel != channel) continue;
    const ParaxialData<T>& par = paraxial_by_lambda.at(wl.nm);
    PupilMap<T> pupil = sample_exit_pupil(prescription, field_obj, d, wl.nm,
                                          options.pupil_samples, &par);
    if (transmission_accum && pupil.launched_in_disc > 0)
      *transmission_accum +=
          T(pupil.transmitted_in_disc) / T(pupil.launched_in_disc);
    const PlaneC<T> h =
        amplitude_spread(pupil_function(pupil), options.padding);

    FinePsf f;
    f.intensity = h.abs2();
    f.pitch = asf_sample_spacing(pupil, options.padding);
    f.chief = Vec2<T>(pupil.chief_image.x(), pupil.chief_image.y());
    f.weight = wl.weight;
    const T total = f.intensity.sum();
    if (!(total > T(0)))
      throw std::runtime_error("patch_kernel: empty point-spread field");

    const int N = static_cast<int>(f.intensity.rows());
    T cx = T(0), cy = T(0);
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) {
        cx += f.intensity(r, c) * T(c);
        cy += f.intensity(r, c) * T(r);
      }
    const Vec2<T> centroid =
        f.chief + (Vec2<T>(cx, cy) / total - Vec2<T>(T(N / 2), T(N / 2))) *
                      f.pitch;
    ref += f.weight * centroid;
    wsum += f.weight;
    fine.push_back(std::move(f));
  }
  if (fine.empty())
    throw std::runtime_error("patch_kernel: channel has no wavelengths");
  ref /= wsum;

  PSFKernel<T> out;
  out.size = options.kernel_size;
  out.channel = channel;
  out.pixel_pitch = prescription.pixel_pitch;
  out.values = Plane<T>::Zero(options.kernel_size, options.kernel_size);
  for (const FinePsf& f : fine) {
    const int N = static_cast<int>(f.intensity.rows());
    // resample_matrix centres an even grid at sample (N-1)/2, while the
    // physical centre sits at index N/2: compensate by half a pitch
    const Vec2<T> shift =
        f.chief - ref - Vec2<T>(T(0.5) * f.pitch, T(0.5) * f.pitch);
    out.values += f.weight * resample_kernel(f.intensity, f.pitch,
                                             prescription.pixel_pitch,
                                             options.kernel_size, shift.x(),
                                             shift.y());
  }
  const T total = out.values.sum();
  if (!(total > T(0)))
    throw std::runtime_error("patch_kernel: kernel lost all energy");
  out.values /= total;
  out.center_offset = (ref - patch_center_img) / prescription.pixel_pitch;
  return out;
}

}  // namespace detail

/// Builds the 32 x 32 x channels kernel grid for an image of the given
/// pixel dimensions at object-plane shift d, together with the
/// relative-illuminance grid.  Fields map to object points through the
/// design magnification.  Per-field failures fall back to an impulse
/// kernel; more than 1% of failed fields aborts.
template <typename T>
PSFGrid<T> psf_grid(const LensPrescription<T>& prescription, T d,
                    int image_height, int image_width,
                    const PsfGridOptions<T>& options = {}) {
  const int G = kPatchGridSize;
  const int channels = prescription.channel_count();
  PSFGrid<T> grid;
  grid.distance = d;
  grid.channels = channels;
  grid.kernel_size = options.kernel_size;
  grid.kernels.resize(static_cast<size_t>(channels) * G * G);
  grid.illuminance = Plane<T>::Zero(G, G);

  std::map<T, ParaxialData<T>> paraxial_by_lambda;
  for (const auto& wl : prescription.wavelengths)
    if (!paraxial_by_lambda.count(wl.nm))
      paraxial_by_lambda[wl.nm] = paraxial_solve(prescription, wl.nm);
  const T mag = paraxial_by_lambda.begin()->second.magnification;

  const int wavelength_count =
      static_cast<int>(prescription.wavelengths.size());
  std::vector<int> failures(G * G, 0);
  Plane<T> transmission = Plane<T>::Zero(G, G);

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(dynamic) \
    num_threads(options.threads > 0 ? options.threads : omp_get_max_threads())
#endif
  for (int i = 0; i < G; ++i) {
    for (int j = 0; j < G; ++j) {
      const T x_img = ((T(j) + T(0.5)) * T(image_width) / T(G) -
                       T(0.5) * T(image_width)) *
                      prescription.pixel_pitch;
      const T y_img = ((T(i) + T(0.5)) * T(image_height) / T(G) -
                       T(0.5) * T(image_height)) *
                      prescription.pixel_pitch;
      const Vec2<T> patch_img(x_img, y_img);
      const Vec2<T> field_obj = patch_img / mag;
      try {
        T trans_sum = T(0);
        for (int ch = 0; ch < channels; ++ch) {
          grid.at(ch, i, j) = detail::patch_kernel(
              prescription, field_obj, patch_img, d, ch, paraxial_by_lambda,
              options, &trans_sum);
          grid.at(ch, i, j).field_i = i;
          grid.at(ch, i, j).field_j = j;
        }
        transmission(i, j) = trans_sum / T(wavelength_count);
      } catch (const std::exception&) {
        failures[i * G + j] = 1;
        for (int ch = 0; ch < channels; ++ch) {
          PSFKernel<T>& k = grid.at(ch, i, j);
          k.size = options.kernel_size;
          k.channel = ch;
          k.field_i = i;
          k.field_j = j;
          k.pixel_pitch = prescription.pixel_pitch;
          k.values =
              Plane<T>::Zero(options.kernel_size, options.kernel_size);
          k.values(options.kernel_size / 2, options.kernel_size / 2) = T(1);
        }
        transmission(i, j) = T(0);
      }
    }
  }

  int failure_count = 0;
  for (int f : failures) failure_count += f;
  if (failure_count * 100 > G * G)
    throw std::runtime_error("psf_grid: more than 1% of fields failed (" +
                             std::to_string(failure_count) + " of " +
                             std::to_string(G * G) + ")");

  // normalize illuminance to the central patches; failed cells read 1
  const T center =
      T(0.25) * (transmission(G / 2 - 1, G / 2 - 1) +
                 transmission(G / 2 - 1, G / 2) +
                 transmission(G / 2, G / 2 - 1) + transmission(G / 2, G / 2));
  if (!(center > T(0)))
    throw std::runtime_error("psf_grid: central patches fully vignetted");
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j)
      grid.illuminance(i, j) =
          transmission(i, j) > T(0)
              ? std::min(T(1), transmission(i, j) / center)
              : T(1);
  return grid;
}

}  // namespace aberrasim
