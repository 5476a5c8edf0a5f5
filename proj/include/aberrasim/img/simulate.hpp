#pragma once

#include "aberrasim/img/convolve.hpp"
#include "aberrasim/img/noise.hpp"
#include "aberrasim/wavefront/psf_grid.hpp"

namespace aberrasim {

/// Full degradation of one sharp image at object-plane shift d: build (or
/// reuse) the field-dependent kernel grid, convolve patch-wise with
/// illuminance falloff, then add sensor noise.  d must lie in the
/// supported [-125, 125] mm sweep.
template <typename T>
ImageBuffer<T> simulate(const ImageBuffer<T>& img,
                        const LensPrescription<T>& prescription, T d,
                        const NoiseModel& noise, std::uint64_t seed,
                        const PsfGridOptions<T>& grid_options = {},
                        const ConvolveOptions& conv_options = {},
                        const PSFGrid<T>* precomputed_grid = nullptr) {
  if (d < T(-125) || d > T(125))
    throw std::invalid_argument("simulate: d outside [-125, 125] mm");
  PSFGrid<T> local;
  const PSFGrid<T>* grid = precomputed_grid;
  if (!grid) {
    local = psf_grid(prescription, d, img.height, img.width, grid_options);
    grid = &local;
  }
  ImageBuffer<T> blurred = convolve_patchwise(img, *grid, conv_options);
  NoiseModel seeded = noise;
  seeded.seed = seed;
  return add_noise(blurred, seeded);
}

}  // namespace aberrasim
