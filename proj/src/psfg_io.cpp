#include "aberrasim/io/psfg_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aberrasim/io/binary.hpp"
#include "aberrasim/io/io_error.hpp"
#include "aberrasim/io/png_io.hpp"

namespace aberrasim {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'F', 'G'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

void save_psf_grid(const PSFGrid<double>& grid, const std::string& path) {
  const int G = kPatchGridSize;
  const size_t expected = static_cast<size_t>(grid.channels) * G * G;
  if (grid.channels < 1 || grid.kernel_size < 1 ||
      grid.kernels.size() != expected)
    throw std::invalid_argument("save_psf_grid: inconsistent grid");
  for (const auto& k : grid.kernels)
    if (k.values.rows() != grid.kernel_size ||
        k.values.cols() != grid.kernel_size)
      throw std::invalid_argument("save_psf_grid: kernel size mismatch");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_psf_grid: cannot open " + path);
  out.write(kMagic, 4);
  detail::write_u16(out, kVersion);
  detail::write_u32(out, G);
  detail::write_u32(out, G);
  detail::write_u32(out, static_cast<std::uint32_t>(grid.channels));
  detail::write_u32(out, static_cast<std::uint32_t>(grid.kernel_size));
  detail::write_f64(out, grid.distance);
  for (const auto& k : grid.kernels)
    for (int r = 0; r < grid.kernel_size; ++r)
      for (int c = 0; c < grid.kernel_size; ++c)
        detail::write_f32(out, static_cast<float>(k.values(r, c)));
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j)
      detail::write_f32(out, static_cast<float>(grid.illuminance(i, j)));
  for (const auto& k : grid.kernels) {
    detail::write_f32(out, static_cast<float>(k.center_offset.x()));
    detail::write_f32(out, static_cast<float>(k.center_offset.y()));
  }
  detail::write_f64(out, grid.kernels.front().pixel_pitch);
  if (!out) throw IoError("save_psf_grid: write failed: " + path);
}

PSFGrid<double> load_psf_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_psf_grid: cannot open " + path);
  char magic[4];
  detail::read_exact(in, magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kMagic))
    throw IoError("load_psf_grid: bad magic in " + path);
  const std::uint16_t version = detail::read_u16(in, "version");
  if (version != kVersion)
    throw IoError("load_psf_grid: unsupported version " +
                             std::to_string(version));
  const int G = kPatchGridSize;
  const auto rows = detail::read_u32(in, "dims");
  const auto cols = detail::read_u32(in, "dims");
  const auto channels = detail::read_u32(in, "dims");
  const auto size = detail::read_u32(in, "dims");
  if (rows != static_cast<unsigned>(G) || cols != static_cast<unsigned>(G) ||
      channels < 1 || channels > 16 || size < 1 || size % 2 == 0 ||
      size > 4096)
    throw IoError("load_psf_grid: implausible dims in " + path);

  PSFGrid<double> grid;
  grid.channels = static_cast<int>(channels);
  grid.kernel_size = static_cast<int>(size);
  grid.distance = detail::read_f64(in, "distance");
  grid.kernels.resize(static_cast<size_t>(channels) * G * G);
  for (unsigned ch = 0; ch < channels; ++ch)
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) {
        PSFKernel<double>& k = grid.at(static_cast<int>(ch), i, j);
        k.size = grid.kernel_size;
        k.channel = static_cast<int>(ch);
        k.field_i = i;
        k.field_j = j;
        k.values = Plane<double>(grid.kernel_size, grid.kernel_size);
        for (int r = 0; r < grid.kernel_size; ++r)
          for (int c = 0; c < grid.kernel_size; ++c)
            k.values(r, c) = detail::read_f32(in, "kernel data");
      }
  grid.illuminance = Plane<double>(G, G);
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j)
      grid.illuminance(i, j) = detail::read_f32(in, "illuminance");
  for (auto& k : grid.kernels) {
    k.center_offset.x() = detail::read_f32(in, "center offsets");
    k.center_offset.y() = detail::read_f32(in, "center offsets");
  }
  const double pitch = detail::read_f64(in, "pixel pitch");
  for (auto& k : grid.kernels) k.pixel_pitch = pitch;
  return grid;
}

void dump_psf_grid_png(const PSFGrid<double>& grid, const std::string& path) {
  const int G = kPatchGridSize;
  const int s = grid.kernel_size;
  const bool rgb = grid.channels == 3;
  const int tile_rows = rgb ? G : G * grid.channels;

  ImageBuffer<float> img;
  img.height = tile_rows * s;
  img.width = G * s;
  img.channels = rgb ? 3 : 1;
  img.planes.assign(img.channels, Plane<float>::Zero(img.height, img.width));

  // each kernel is shown on its own 4-decade log scale so faint structure
  // stays visible next to near-delta kernels
  constexpr double kDecades = 4.0;
  for (int ch = 0; ch < grid.channels; ++ch)
    for (int i = 0; i < G; ++i)
      for (int j = 0; j < G; ++j) {
        const Plane<double>& v = grid.at(ch, i, j).values;
        const double vmax = v.maxCoeff();
        const int row0 = (rgb ? i : ch * G + i) * s;
        const int col0 = j * s;
        Plane<float>& plane = img.planes[rgb ? ch : 0];
        if (!(vmax > 0.0)) continue;
        for (int r = 0; r < s; ++r)
          for (int c = 0; c < s; ++c) {
            const double x = v(r, c) / vmax;
            const double y =
                x > 0.0 ? 1.0 + std::log10(x) / kDecades : 0.0;
            plane(row0 + r, col0 + c) =
                static_cast<float>(std::clamp(y, 0.0, 1.0));
          }
      }
  write_png(path, img, 8);
}

}  // namespace aberrasim
