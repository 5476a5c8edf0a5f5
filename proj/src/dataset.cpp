#include "aberrasim/io/dataset.hpp"

#include "aberrasim/io/io_error.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "aberrasim/io/png_io.hpp"
#include "aberrasim/io/prescription_json.hpp"
#include "aberrasim/io/psfg_io.hpp"
#include "aberrasim/io/sha256.hpp"

namespace aberrasim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string manifest_to_json(const DatasetManifest& manifest) {
  json doc;
  doc["version"] = manifest.version;
  doc["prescription_sha256"] = manifest.prescription_sha256;
  doc["entries"] = json::array();
  for (const auto& e : manifest.entries)
    doc["entries"].push_back({{"sharp", e.sharp},
                              {"degraded", e.degraded},
                              {"distance_mm", e.distance_mm},
                              {"seed", e.seed}});
  return doc.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("manifest: invalid JSON: ") +
                                e.what());
  }
  DatasetManifest m;
  m.version = doc.at("version").get<int>();
  m.prescription_sha256 = doc.at("prescription_sha256").get<std::string>();
  for (const auto& je : doc.at("entries")) {
    DatasetEntry e;
    e.sharp = je.at("sharp").get<std::string>();
    e.degraded = je.at("degraded").get<std::string>();
    e.distance_mm = je.at("distance_mm").get<double>();
    e.seed = je.at("seed").get<std::uint64_t>();
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_manifest: cannot open " + path);
  out << manifest_to_json(manifest);
  if (!out) throw IoError("save_manifest: write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_manifest: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::vector<double> default_distance_sweep() {
  std::vector<double> d(101);
  for (int i = 0; i < 101; ++i) d[i] = -125.0 + 2.5 * i;
  return d;
}

namespace {

/// "-112.5" -> "m0112_50": filesystem-safe, unique per 0.01 mm.
std::string distance_token(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+09.2f", d);
  std::string s(buf);
  for (char& c : s) {
    if (c == '+') c = 'p';
    if (c == '-') c = 'm';
    if (c == '.') c = '_';
  }
  return s;
}

std::string cache_file_name(const std::string& prescription_sha, double d,
                            int height, int width,
                            const PsfGridOptions<double>& g) {
  std::ostringstream key;
  key.precision(17);
  key << prescription_sha << "|d=" << d << "|h=" << height << "|w=" << width
      << "|n=" << g.pupil_samples << "|pad=" << g.padding
      << "|ks=" << g.kernel_size << "|v1";
  return "psfg-" + sha256_hex(key.str()).substr(0, 16) + ".psfg";
}

}  // namespace

DatasetManifest generate_dataset(const std::string& prescription_path,
                                 const std::string& sharp_dir,
                                 const std::vector<double>& distances,
                                 const std::string& out_dir,
                                 const DatasetOptions& options) {
  const LensPrescription<double> prescription =
      load_prescription(prescription_path);
  std::function<void(const std::string&)> report = options.on_error;
  if (!report)
    report = [](const std::string& msg) {
      std::fprintf(stderr, "%s\n", msg.c_str());
    };

  std::vector<std::string> sharp_files;
  for (const auto& entry : fs::directory_iterator(sharp_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      sharp_files.push_back(entry.path().string());
  std::sort(sharp_files.begin(), sharp_files.end());

  fs::create_directories(out_dir);
  std::string cache_dir = options.cache_dir;
  if (cache_dir.empty())
    if (const char* env = std::getenv("ABERRASIM_CACHE_DIR")) cache_dir = env;
  if (!cache_dir.empty()) fs::create_directories(cache_dir);

  DatasetManifest manifest;
  manifest.prescription_sha256 = sha256_file_hex(prescription_path);

  const int n_images = static_cast<int>(sharp_files.size());
  for (size_t di = 0; di < distances.size(); ++di) {
    const double d = distances[di];
    // one grid per image size at this distance, reused across images
    std::map<std::pair<int, int>, PSFGrid<double>> grids;
    for (int ii = 0; ii < n_images; ++ii) {
      const std::uint64_t entry_seed =
          mix_seed(options.seed, di * n_images + ii);
      const std::string& sharp_path = sharp_files[ii];
      try {
        const ImageBuffer<float> sharp8 = read_png(sharp_path);
        const ImageBuffer<double> sharp = image_cast<double>(sharp8);

        const auto dims = std::make_pair(sharp.height, sharp.width);
        auto it = grids.find(dims);
        if (it == grids.end()) {
          PSFGrid<double> grid;
          bool loaded = false;
          std::string cache_path;
          if (!cache_dir.empty()) {
            cache_path =
                (fs::path(cache_dir) /
                 cache_file_name(manifest.prescription_sha256, d,
                                 sharp.height, sharp.width, options.grid))
                    .string();
            if (fs::exists(cache_path)) {
              try {
                grid = load_psf_grid(cache_path);
                loaded = grid.channels == prescription.channel_count() &&
                         grid.kernel_size == options.grid.kernel_size &&
                         std::abs(grid.distance - d) < 1e-9;
              } catch (const std::exception&) {
                loaded = false;  // stale or corrupt cache: recompute
              }
            }
          }
          if (!loaded) {
            grid = psf_grid(prescription, d, sharp.height, sharp.width,
                            options.grid);
            if (!cache_path.empty()) save_psf_grid(grid, cache_path);
          }
          it = grids.emplace(dims, std::move(grid)).first;
        }

        const ImageBuffer<double> degraded =
            simulate(sharp, prescription, d, options.noise, entry_seed,
                     options.grid, options.conv, &it->second);

        const std::string stem = fs::path(sharp_path).stem().string();
        const std::string degraded_name =
            stem + "_" + distance_token(d) + ".png";
        write_png((fs::path(out_dir) / degraded_name).string(),
                  image_cast<float>(degraded), 16);

        DatasetEntry e;
        e.sharp = sharp_path;
        e.degraded = degraded_name;
        e.distance_mm = d;
        e.seed = entry_seed;
        manifest.entries.push_back(std::move(e));
      } catch (const std::exception& ex) {
        std::ostringstream msg;
        msg << "dataset entry failed (" << sharp_path << " at d=" << d
            << " mm): " << ex.what();
        report(msg.str());
      }
    }
  }

  save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  return manifest;
}

}  // namespace aberrasim
