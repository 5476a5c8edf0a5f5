#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aberrasim/img/metrics.hpp"
#include "aberrasim/img/mtf.hpp"
#include "aberrasim/img/simulate.hpp"
#include "aberrasim/io/cinn_io.hpp"
#include "aberrasim/io/dataset.hpp"
#include "aberrasim/io/io_error.hpp"
#include "aberrasim/io/png_io.hpp"
#include "aberrasim/io/prescription_json.hpp"
#include "aberrasim/io/psfg_io.hpp"
#include "aberrasim/optics/paraxial.hpp"

namespace {

using nlohmann::json;
using namespace aberrasim;

/// "a,b,c" or "start:step:stop" (inclusive stop, within half a step).
std::vector<double> parse_distances(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double start = 0, step = 0, stop = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> start >> c1 >> step >> c2 >> stop) || c1 != ':' ||
        c2 != ':' || step == 0)
      throw std::invalid_argument("--distances: expected start:step:stop");
    const int n =
        static_cast<int>(std::floor((stop - start) / step + 0.5)) + 1;
    if (n < 1 || n > 100000)
      throw std::invalid_argument("--distances: empty or implausible range");
    for (int i = 0; i < n; ++i) out.push_back(start + step * i);
    return out;
  }
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size())
      throw std::invalid_argument("--distances: bad number \"" + item + "\"");
    out.push_back(v);
  }
  if (out.empty())
    throw std::invalid_argument("--distances: no values given");
  return out;
}

const char* fate_name(RayFate fate) {
  switch (fate) {
    case RayFate::Transmitted: return "transmitted";
    case RayFate::Miss: return "miss";
    case RayFate::Vignetted: return "vignetted";
    case RayFate::TotalInternalReflection: return "total_internal_reflection";
    case RayFate::NoConvergence: return "no_convergence";
  }
  return "miss";
}

void emit(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << text))
      throw IoError("cannot write " + out_path);
  }
}

struct CommonOpts {
  std::string prescription_path;
  double distance = 0.0;
  std::uint64_t seed = 0;
  int pupil_n = 0;
  int kernel_size = 0;
  int threads = 0;
  bool as_json = false;
  std::string out;

  PsfGridOptions<double> grid_options() const {
    PsfGridOptions<double> g;
    if (pupil_n > 0) g.pupil_samples = pupil_n;
    if (kernel_size > 0) g.kernel_size = kernel_size;
    if (threads > 0) g.threads = threads;
    return g;
  }
};

int cmd_trace(const CommonOpts& opt, double field_y, int n_rays,
              double wavelength) {
  const LensPrescription<double> prescription =
      load_prescription(opt.prescription_path);
  const double lambda =
      wavelength > 0 ? wavelength : prescription.wavelengths.front().nm;
  const ParaxialData<double> par = paraxial_solve(prescription, lambda);
  const Vec3<double> origin(0.0, field_y, prescription.object_z(opt.distance));

  json rays = json::array();
  for (int i = 0; i < n_rays; ++i) {
    const double s = n_rays == 1 ? 0.0 : -1.0 + 2.0 * i / (n_rays - 1);
    // aim slightly past the pupil edge so a wide fan shows clipping
    const Vec3<double> target(0.0, 1.1 * s * par.r_entrance_pupil,
                              par.z_entrance_pupil);
    Ray<double> ray;
    ray.origin = origin;
    ray.direction = (target - origin).normalized();
    const TraceResult<double> res = trace_ray(prescription, ray, lambda);

    json jr;
    jr["fate"] = fate_name(res.fate);
    jr["opl_mm"] = res.opl;
    jr["hit_points"] = json::array();
    for (const auto& p : res.hit_points)
      jr["hit_points"].push_back({p.x(), p.y(), p.z()});
    if (res.fate == RayFate::Transmitted)
      jr["exit_direction"] = {res.exit_direction.x(), res.exit_direction.y(),
                              res.exit_direction.z()};
    if (res.clip_surface >= 0) jr["clip_surface"] = res.clip_surface;
    rays.push_back(std::move(jr));
  }

  json doc;
  doc["distance_mm"] = opt.distance;
  doc["field_y_mm"] = field_y;
  doc["rays"] = std::move(rays);
  if (opt.as_json) {
    emit(doc, opt.out);
  } else {
    for (const auto& jr : doc["rays"])
      std::printf("%-26s  opl %.6f mm  %zu surface hits\n",
                  jr["fate"].get<std::string>().c_str(),
                  jr["opl_mm"].get<double>(), jr["hit_points"].size());
  }
  return 0;
}

int cmd_psf(const CommonOpts& opt, int height, int width,
            const std::string& dump_png) {
  const LensPrescription<double> prescription =
      load_prescription(opt.prescription_path);
  const PSFGrid<double> grid = psf_grid(prescription, opt.distance, height,
                                        width, opt.grid_options());
  if (opt.out.empty())
    throw std::invalid_argument("psf: --out <file.psfg> is required");
  save_psf_grid(grid, opt.out);
  if (!dump_png.empty()) dump_psf_grid_png(grid, dump_png);

  json doc;
  doc["out"] = opt.out;
  if (!dump_png.empty()) doc["mosaic"] = dump_png;
  doc["distance_mm"] = grid.distance;
  doc["channels"] = grid.channels;
  doc["kernel_size"] = grid.kernel_size;
  doc["illuminance_min"] = grid.illuminance.minCoeff();
  if (opt.as_json)
    emit(doc, "");
  else
    std::printf("wrote %s: %d x 32 x 32 kernels of %d px at d=%g mm\n",
                opt.out.c_str(), grid.channels, grid.kernel_size,
                grid.distance);
  return 0;
}

int cmd_simulate(const CommonOpts& opt, const std::string& in_path,
                 double noise_a, double noise_b) {
  const LensPrescription<double> prescription =
      load_prescription(opt.prescription_path);
  if (opt.out.empty())
    throw std::invalid_argument("simulate: --out <file.png> is required");
  const ImageBuffer<double> sharp = image_cast<double>(read_png(in_path));
  NoiseModel noise;
  noise.a = noise_a;
  noise.b = noise_b;
  ConvolveOptions conv;
  if (opt.threads > 0) conv.threads = opt.threads;
  const ImageBuffer<double> degraded =
      simulate(sharp, prescription, opt.distance, noise, opt.seed,
               opt.grid_options(), conv);
  write_png(opt.out, image_cast<float>(degraded), 16);

  json doc;
  doc["out"] = opt.out;
  doc["distance_mm"] = opt.distance;
  doc["seed"] = opt.seed;
  doc["height"] = degraded.height;
  doc["width"] = degraded.width;
  doc["channels"] = degraded.channels;
  if (opt.as_json)
    emit(doc, "");
  else
    std::printf("wrote %s (%dx%d, %d channels) at d=%g mm\n",
                opt.out.c_str(), degraded.width, degraded.height,
                degraded.channels, opt.distance);
  return 0;
}

int cmd_dataset(const CommonOpts& opt, const std::string& sharp_dir,
                const std::string& out_dir, const std::string& distances_text,
                double noise_a, double noise_b,
                const std::string& cache_dir) {
  DatasetOptions options;
  options.noise.a = noise_a;
  options.noise.b = noise_b;
  options.seed = opt.seed;
  options.grid = opt.grid_options();
  if (opt.threads > 0) options.conv.threads = opt.threads;
  options.cache_dir = cache_dir;
  const std::vector<double> distances =
      distances_text.empty() || distances_text == "default"
          ? default_distance_sweep()
          : parse_distances(distances_text);
  const DatasetManifest manifest = generate_dataset(
      opt.prescription_path, sharp_dir, distances, out_dir, options);
  if (opt.as_json)
    std::cout << manifest_to_json(manifest);
  else
    std::printf("wrote %zu entries to %s (manifest.json)\n",
                manifest.entries.size(), out_dir.c_str());
  return 0;
}

int cmd_mtf(const CommonOpts& opt, double gaussian_sigma,
            const std::string& psfg_path, int channel, int row, int col,
            const std::string& edge_path, const std::string& roi_text) {
  MtfCurve curve;
  std::string source;
  if (gaussian_sigma > 0) {
    const int size =
        std::max(9, 2 * static_cast<int>(std::ceil(4 * gaussian_sigma)) + 1);
    PSFKernel<double> kernel;
    kernel.size = size;
    kernel.values = Plane<double>(size, size);
    const int c0 = size / 2;
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c)
        kernel.values(r, c) =
            std::exp(-((r - c0) * (r - c0) + (c - c0) * (c - c0)) /
                     (2.0 * gaussian_sigma * gaussian_sigma));
    kernel.values /= kernel.values.sum();
    curve = mtf_from_psf(kernel);
    source = "gaussian";
  } else if (!psfg_path.empty()) {
    const PSFGrid<double> grid = load_psf_grid(psfg_path);
    if (channel < 0 || channel >= grid.channels || row < 0 ||
        row >= kPatchGridSize || col < 0 || col >= kPatchGridSize)
      throw std::invalid_argument("mtf: kernel index out of range");
    curve = mtf_from_psf(grid.at(channel, row, col));
    source = "psfg";
  } else if (!edge_path.empty()) {
    int x = 0, y = 0, w = 0, h = 0;
    if (std::sscanf(roi_text.c_str(), "%d,%d,%d,%d", &x, &y, &w, &h) != 4)
      throw std::invalid_argument("mtf: --roi expects x,y,w,h");
    curve = slanted_edge_mtf(read_png(edge_path), Roi{x, y, w, h});
    source = "slanted_edge";
  } else {
    throw std::invalid_argument(
        "mtf: pick a source (--gaussian-sigma, --psfg or --edge)");
  }

  if (!opt.out.empty()) {
    std::ofstream csv(opt.out, std::ios::binary);
    if (!csv) throw IoError("mtf: cannot write " + opt.out);
    csv << "cycles_per_pixel,modulation\n";
    csv.precision(9);
    for (size_t i = 0; i < curve.frequency.size(); ++i)
      csv << curve.frequency[i] << ',' << curve.modulation[i] << '\n';
    if (!csv) throw IoError("mtf: write failed: " + opt.out);
  }

  bool no_crossing = false;
  const double half = mtf50(curve, &no_crossing);
  if (opt.as_json) {
    json doc;
    doc["mtf50_cycles_per_pixel"] = half;
    doc["no_crossing"] = no_crossing;
    doc["source"] = source;
    if (!opt.out.empty()) doc["csv"] = opt.out;
    emit(doc, "");
  } else {
    std::printf("MTF50: %.4f cycles/pixel%s\n", half,
                no_crossing ? " (no 0.5 crossing before Nyquist)" : "");
  }
  return 0;
}

int cmd_metrics(const CommonOpts& opt, const std::string& a_path,
                const std::string& b_path) {
  const ImageBuffer<float> a = read_png(a_path);
  const ImageBuffer<float> b = read_png(b_path);
  json doc;
  doc["psnr_db"] = psnr(a, b);
  doc["ssim"] = ssim(a, b);
  if (opt.as_json)
    emit(doc, opt.out);
  else
    std::printf("PSNR %.4f dB   SSIM %.6f\n", doc["psnr_db"].get<double>(),
                doc["ssim"].get<double>());
  return 0;
}

int cmd_inn_roundtrip(const CommonOpts& opt, int k, int channels, int height,
                      int width) {
  const ConditionalINN<float> net =
      ConditionalINN<float>::make(channels, k, opt.seed);
  const Tensor3<float> t = Tensor3<float>::random_normal(
      channels, height, width, mix_seed(opt.seed, 7), 1.0f);
  const ConditionCode code = encode_condition(opt.distance);

  auto max_error = [&](const ConditionalINN<float>& n) {
    const Tensor3<float> x = n.chain_forward(t, code);
    const Tensor3<float> back = n.chain_inverse(x, code);
    float err = 0.0f;
    for (size_t i = 0; i < t.data.size(); ++i)
      err = std::max(err, std::abs(back.data[i] - t.data[i]));
    return err;
  };
  const float err = max_error(net);

  json doc;
  doc["k"] = k;
  doc["image_channels"] = channels;
  doc["seed"] = opt.seed;
  doc["height"] = height;
  doc["width"] = width;
  doc["distance_mm"] = opt.distance;
  doc["max_error"] = err;
  if (!opt.out.empty()) {
    save_inn(net, opt.out);
    const ConditionalINN<float> reloaded = load_inn(opt.out);
    doc["weights"] = opt.out;
    doc["reloaded_max_error"] = max_error(reloaded);
  }
  if (opt.as_json)
    emit(doc, "");
  else
    std::printf("k=%d round-trip max error: %.3e\n", k, err);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Physically based optical degradation simulator and invertible "
      "restoration-network toolkit"};
  app.require_subcommand(1);

  CommonOpts opt;
  auto add_common = [&](CLI::App* sub, bool needs_prescription) {
    if (needs_prescription)
      sub->add_option("--prescription", opt.prescription_path,
                      "lens prescription JSON")
          ->required()
          ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "RNG seed (default 0)");
    sub->add_option("--threads", opt.threads, "worker thread cap");
    sub->add_flag("--json", opt.as_json, "machine-readable stdout");
    sub->add_option("--out", opt.out, "output path");
  };
  auto add_optics = [&](CLI::App* sub) {
    sub->add_option("--distance", opt.distance,
                    "object-plane shift d in mm, [-125, 125]");
    sub->add_option("--pupil-n", opt.pupil_n, "pupil samples per side");
    sub->add_option("--kernel-size", opt.kernel_size,
                    "PSF kernel window (odd, pixels)");
  };

  // trace
  double field_y = 0.0, wavelength = 0.0;
  int n_rays = 1;
  CLI::App* trace = app.add_subcommand("trace", "trace a fan of rays");
  add_common(trace, true);
  trace->add_option("--distance", opt.distance, "object-plane shift, mm");
  trace->add_option("--field-y", field_y, "object height, mm");
  trace->add_option("--rays", n_rays, "rays in the fan")
      ->check(CLI::PositiveNumber);
  trace->add_option("--wavelength", wavelength, "nm (default: first design)");

  // psf
  int img_h = 1024, img_w = 1024;
  std::string dump_png;
  CLI::App* psf = app.add_subcommand("psf", "compute a kernel grid");
  add_common(psf, true);
  add_optics(psf);
  psf->add_option("--height", img_h, "image height, px");
  psf->add_option("--width", img_w, "image width, px");
  psf->add_option("--dump-png", dump_png, "log-scaled kernel mosaic PNG");

  // simulate
  std::string in_path;
  double noise_a = 1e-3, noise_b = 1e-4;
  CLI::App* sim = app.add_subcommand("simulate", "degrade one image");
  add_common(sim, true);
  add_optics(sim);
  sim->add_option("--in", in_path, "sharp input PNG")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--noise-a", noise_a, "signal-dependent variance slope");
  sim->add_option("--noise-b", noise_b, "variance floor");

  // dataset
  std::string sharp_dir, out_dir, distances_text, cache_dir;
  CLI::App* dataset = app.add_subcommand("dataset", "degrade a directory");
  add_common(dataset, true);
  add_optics(dataset);
  dataset->add_option("--sharp-dir", sharp_dir, "directory of sharp PNGs")
      ->required()
      ->check(CLI::ExistingDirectory);
  dataset->add_option("--out-dir", out_dir, "output directory")->required();
  dataset->add_option("--distances", distances_text,
                      "comma list or start:step:stop (default -125:2.5:125)");
  dataset->add_option("--noise-a", noise_a, "signal-dependent variance slope");
  dataset->add_option("--noise-b", noise_b, "variance floor");
  dataset->add_option("--cache-dir", cache_dir,
                      "kernel-grid cache (default $ABERRASIM_CACHE_DIR)");

  // mtf
  double gaussian_sigma = 0.0;
  std::string psfg_path, edge_path, roi_text;
  int channel = 0, row = kPatchGridSize / 2, col = kPatchGridSize / 2;
  CLI::App* mtf = app.add_subcommand("mtf", "modulation transfer curve");
  add_common(mtf, false);
  mtf->add_option("--gaussian-sigma", gaussian_sigma,
                  "synthetic Gaussian kernel sigma, px");
  mtf->add_option("--psfg", psfg_path, "kernel grid file")
      ->check(CLI::ExistingFile);
  mtf->add_option("--channel", channel, "kernel channel");
  mtf->add_option("--row", row, "patch row (default centre)");
  mtf->add_option("--col", col, "patch column (default centre)");
  mtf->add_option("--edge", edge_path, "slanted-edge photograph PNG")
      ->check(CLI::ExistingFile);
  mtf->add_option("--roi", roi_text, "edge region x,y,w,h");

  // metrics
  std::string a_path, b_path;
  CLI::App* metrics = app.add_subcommand("metrics", "PSNR and SSIM");
  add_common(metrics, false);
  metrics->add_option("--a", a_path, "first PNG")
      ->required()
      ->check(CLI::ExistingFile);
  metrics->add_option("--b", b_path, "second PNG")
      ->required()
      ->check(CLI::ExistingFile);

  // inn-roundtrip
  int k = 8, channels = 3, t_height = 64, t_width = 64;
  CLI::App* inn =
      app.add_subcommand("inn-roundtrip", "invertibility self-check");
  add_common(inn, false);
  inn->add_option("--distance", opt.distance, "condition distance, mm");
  inn->add_option("--k", k, "invertible block count")
      ->check(CLI::PositiveNumber);
  inn->add_option("--channels", channels, "image channels");
  inn->add_option("--height", t_height, "tensor height (even)");
  inn->add_option("--width", t_width, "tensor width (even)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*trace) return cmd_trace(opt, field_y, n_rays, wavelength);
    if (*psf) return cmd_psf(opt, img_h, img_w, dump_png);
    if (*sim) return cmd_simulate(opt, in_path, noise_a, noise_b);
    if (*dataset)
      return cmd_dataset(opt, sharp_dir, out_dir, distances_text, noise_a,
                         noise_b, cache_dir);
    if (*mtf)
      return cmd_mtf(opt, gaussian_sigma, psfg_path, channel, row, col,
                     edge_path, roi_text);
    if (*metrics) return cmd_metrics(opt, a_path, b_path);
    if (*inn) return cmd_inn_roundtrip(opt, k, channels, t_height, t_width);
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 4;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
