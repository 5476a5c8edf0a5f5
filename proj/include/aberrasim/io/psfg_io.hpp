#pragma once

#include <string>

#include "aberrasim/wavefront/psf_grid.hpp"

namespace aberrasim {

/// Kernel-grid container, magic "PSFG": version, grid dims
/// (32, 32, channels, kernel size), object-plane shift as float64, then
/// float32 little-endian kernel values and the illuminance grid.
/// Version 1 appends per-kernel centre offsets and the sensor pixel
/// pitch so a loaded grid reproduces the saved one exactly (modulo the
/// float32 quantization).
void save_psf_grid(const PSFGrid<double>& grid, const std::string& path);
PSFGrid<double> load_psf_grid(const std::string& path);

/// Renders all kernels as a log-scaled mosaic (patches laid out in their
/// 32 x 32 grid positions) for visual inspection.  Three-channel grids
/// map to RGB; any other channel count is stacked vertically as gray.
void dump_psf_grid_png(const PSFGrid<double>& grid, const std::string& path);

}  // namespace aberrasim
