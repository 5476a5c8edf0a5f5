#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aberrasim/img/simulate.hpp"

namespace aberrasim {

struct DatasetEntry {
  std::string sharp;     // source image path as given
  std::string degraded;  // file name relative to the output directory
  double distance_mm = 0.0;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  int version = 1;
  std::string prescription_sha256;
  std::vector<DatasetEntry> entries;
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& json_text);
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// The default object-plane sweep: -125 mm to +125 mm in 2.5 mm steps,
/// 101 values.
std::vector<double> default_distance_sweep();

struct DatasetOptions {
  NoiseModel noise{};
  std::uint64_t seed = 0;
  PsfGridOptions<double> grid{};
  ConvolveOptions conv{};
  /// Kernel-grid cache directory; empty falls back to the
  /// ABERRASIM_CACHE_DIR environment variable, and caching is skipped if
  /// neither is set.
  std::string cache_dir;
  /// Per-entry failure reports; defaults to stderr when unset.
  std::function<void(const std::string&)> on_error;
};

/// Degrades every PNG in sharp_dir at every listed distance, writing
/// 16-bit PNGs plus manifest.json into out_dir.  Kernel grids are
/// computed once per (distance, image size) and cached on disk when a
/// cache directory is available.  Entry seeds derive from the base seed
/// and the entry's position in the (distance, image) cross product, so
/// reruns are byte-identical.  Failed entries are reported and skipped;
/// the manifest only lists files that were written.
DatasetManifest generate_dataset(const std::string& prescription_path,
                                 const std::string& sharp_dir,
                                 const std::vector<double>& distances,
                                 const std::string& out_dir,
                                 const DatasetOptions& options = {});

}  // namespace aberrasim
