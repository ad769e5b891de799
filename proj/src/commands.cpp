#include "spdc/commands.hpp"

#include <chrono>
#include <ostream>
#include <utility>

#include <Eigen/Core>

#include "spdc/analysis.hpp"
#include "spdc/image_io.hpp"

namespace spdc {

namespace fs = std::filesystem;

namespace {

class Manifest {
 public:
  explicit Manifest(std::string command) {
    add("tool", "spdc");
    add("version", kToolVersion);
    add("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                     std::to_string(EIGEN_MINOR_VERSION));
    add("command", std::move(command));
  }

  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

  void echo(const RunConfig& config) {
    for (auto& [k, v] : config_entries(config)) add("config." + k, v);
  }

  // Runs one pipeline stage, recording its wall time and tagging failures.
  template <typename F>
  auto stage(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&] {
      const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
      timings_.emplace_back("time." + name + "_ms", format_number(dt.count()));
    };
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record();
      } else {
        auto out = body();
        record();
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  }

  void file(const fs::path& path) { files_.push_back(path); }

  // Writes manifest.txt after every listed file exists.
  fs::path write(const fs::path& dir) const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    for (const auto& [k, v] : timings_) out += k + " = " + v + "\n";
    for (const auto& p : files_)
      out += "file " + p.filename().string() + " " + sha256_file(p) + " " + std::to_string(fs::file_size(p)) + "\n";
    const auto path = dir / "manifest.txt";
    write_text(path, out);
    return path;
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::pair<std::string, std::string>> timings_;
  std::vector<fs::path> files_;
};

fs::path prepare_dir(const std::optional<fs::path>& override_dir, const RunConfig& config) {
  const fs::path dir = override_dir ? *override_dir : fs::path(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string profile_csv(const RadialProfile& p) {
  std::string out = "radius_mm,intensity\n";
  for (std::size_t k = 0; k < p.radii_mm.size(); ++k)
    out += format_number(p.radii_mm[k]) + "," + format_number(p.intensity[k]) + "\n";
  return out;
}

std::string metrics_csv(const RingMetrics& m, const SpdcImage& image, std::size_t kernel_count) {
  std::string out = "metric,value\n";
  out += "dual_ring," + std::string(m.dual_ring ? "true" : "false") + "\n";
  out += "fwhm_mm," + format_number(m.fwhm_mm) + "\n";
  out += "separation_mm," + format_number(m.separation_mm) + "\n";
  if (m.sigma_ring_mm) out += "sigma_ring_mm," + format_number(*m.sigma_ring_mm) + "\n";
  out += "peak_count," + std::to_string(m.peak_radii_mm.size()) + "\n";
  for (std::size_t k = 0; k < m.peak_radii_mm.size(); ++k)
    out += "peak_radius_" + std::to_string(k) + "_mm," + format_number(m.peak_radii_mm[k]) + "\n";
  out += "total_intensity," + format_number(image.values.sum()) + "\n";
  out += "kernel_count," + std::to_string(kernel_count) + "\n";
  return out;
}

std::string row_error_footer(const std::optional<std::string>& error) { return "# error " + *error + "\n"; }

}  // namespace

CommandResult cmd_simulate(const RunConfig& input, const SimulateOptions& options) {
  RunConfig config = input;
  if (options.direct) config.synthesis_path = SynthesisPath::kDirect;

  Manifest manifest("simulate");
  manifest.stage("config", [&] { validate_config(config); });
  manifest.echo(config);
  const SimulationSetup setup = config.setup();
  const fs::path dir = manifest.stage("output", [&] { return prepare_dir(options.output_dir, config); });

  IntensityGrid pump = manifest.stage("render", [&] { return render_beam(config.beam, setup.detector.grid()); });
  if (config.clip_to_crystal)
    pump = manifest.stage("clip", [&] { return clip_to_aperture(pump, setup.crystal.aperture); });
  const auto kernels = manifest.stage("kernels", [&] { return build_kernels(setup); });
  const SpdcImage image = manifest.stage("synthesize", [&] {
    return setup.path == SynthesisPath::kDirect
               ? synthesize_direct(pump, kernels, setup.detector, setup.synthesis)
               : synthesize_convolution(pump, kernels, setup.detector, setup.synthesis);
  });
  const RadialProfile profile = manifest.stage("profile", [&] { return radial_profile(image, setup.profile); });
  const RingMetrics metrics = manifest.stage("metrics", [&] { return detect_dual_rings(profile); });

  manifest.stage("write", [&] {
    const auto pgm = dir / "ring.pgm";
    write_pgm(pgm, image.values);
    manifest.file(pgm);
    const auto csv = dir / "ring.csv";
    write_grid_csv(csv, image.values, image.geometry.pitch_mm);
    manifest.file(csv);
    const auto prof = dir / "profile.csv";
    write_text(prof, profile_csv(profile));
    manifest.file(prof);
    const auto met = dir / "metrics.csv";
    write_text(met, metrics_csv(metrics, image, kernels.size()));
    manifest.file(met);
  });

  CommandResult result;
  result.files = manifest.files();
  result.files.push_back(manifest.stage("manifest", [&] { return manifest.write(dir); }));
  return result;
}

CommandResult cmd_sweep(const RunConfig& input, SweepKind kind, const std::optional<fs::path>& output_dir,
                        std::ostream* log) {
  RunConfig config = input;
  if (config.sweep.kind && *config.sweep.kind != kind)
    throw ValidationError("sweep.kind", "config declares '" + std::string(to_string(*config.sweep.kind)) +
                                            "' but '" + std::string(to_string(kind)) + "' was requested");
  config.sweep.kind = kind;

  Manifest manifest("sweep " + std::string(to_string(kind)));
  manifest.stage("config", [&] { validate_config(config); });
  manifest.echo(config);
  const SimulationSetup setup = config.setup();
  const fs::path dir = manifest.stage("output", [&] { return prepare_dir(output_dir, config); });

  bool failed = false;
  std::string table;
  fs::path path;
  auto note_failure = [&](const std::optional<std::string>& error) {
    if (!error) return false;
    failed = true;
    table += row_error_footer(error);
    if (log) *log << "row failed: " << *error << "\n";
    return true;
  };

  if (kind == SweepKind::kWidth) {
    path = dir / "sweep_width.csv";
    const auto sweep = manifest.stage("sweep", [&] { return sweep_pump_width(config.sweep.sigmas_mm, setup, true); });
    table = "sigma_pump_mm,sigma_ring_mm\n";
    for (const auto& r : sweep.rows)
      table += format_number(r.sigma_pump_mm) + "," + (r.error ? "failed" : format_number(r.sigma_ring_mm)) + "\n";
    for (const auto& r : sweep.rows) note_failure(r.error);
    if (sweep.line)
      table += "# slope=" + format_number(sweep.line->slope) + " intercept=" + format_number(sweep.line->intercept) +
               " r2=" + format_number(sweep.line->r2) + "\n";
  } else if (kind == SweepKind::kOrder) {
    path = dir / "sweep_order.csv";
    const auto rows = manifest.stage(
        "sweep", [&] { return sweep_vortex_order(config.sweep.orders, config.sweep.host_sigma_mm, setup, true); });
    table = "l,fwhm_mm,separation_mm\n";
    for (const auto& r : rows)
      table += std::to_string(r.l) + "," +
               (r.error ? "failed,failed" : format_number(r.fwhm_mm) + "," + format_number(r.separation_mm)) + "\n";
    for (const auto& r : rows) note_failure(r.error);
  } else {
    path = dir / "sweep_critical.csv";
    auto rows = manifest.stage("sweep", [&] {
      return sweep_critical_rows(config.sweep.l, config.sweep.sigma_min_mm, config.sweep.sigma_max_mm,
                                 config.sweep.steps, setup, true);
    });
    table = "sigma_mm,fwhm_mm\n";
    for (const auto& r : rows)
      table += format_number(r.sigma_mm) + "," + (r.error ? "failed" : format_number(r.fwhm_mm)) + "\n";
    for (const auto& r : rows) note_failure(r.error);
    try {
      const auto crit = critical_width_from_rows(std::move(rows));
      table += "# sigma_crit_mm=" + format_number(crit.sigma_crit_mm) +
               " plateau_fwhm_mm=" + format_number(crit.plateau_fwhm_mm) + "\n";
    } catch (const NoTransitionError& e) {
      failed = true;
      table += std::string("# sigma_crit_mm=none reason=") + e.what() + "\n";
      if (log) *log << "no critical width: " << e.what() << "\n";
    }
  }

  manifest.stage("write", [&] {
    write_text(path, table);
    manifest.file(path);
  });
  CommandResult result;
  result.files = manifest.files();
  result.files.push_back(manifest.stage("manifest", [&] { return manifest.write(dir); }));
  result.exit_code = failed ? 1 : 0;
  return result;
}

std::string beam_fit_csv(const BeamFit& fit, int l) {
  std::string out = "parameter,value\n";
  out += "l," + std::to_string(l) + "\n";
  out += "sigma_mm," + format_number(fit.sigma_mm) + "\n";
  out += "i0," + format_number(fit.i0) + "\n";
  out += "center_x_mm," + format_number(fit.center_mm.x()) + "\n";
  out += "center_y_mm," + format_number(fit.center_mm.y()) + "\n";
  out += "offset," + format_number(fit.offset) + "\n";
  out += "rms_residual," + format_number(fit.rms_residual) + "\n";
  out += "iterations," + std::to_string(fit.iterations) + "\n";
  return out;
}

BeamFit cmd_fit_beam(const fs::path& image, int l, const FitBeamOptions& options, std::ostream& out) {
  if (l < 0) throw ValidationError("l", "must be >= 0");
  if (!(options.pgm_pitch_mm > 0)) throw ValidationError("pitch_mm", "must be > 0");
  const IntensityGrid grid = load_grid(image, options.pgm_pitch_mm);
  BeamFitOptions fit_options;
  fit_options.fit_offset = options.fit_offset;
  const BeamFit fit = fit_beam_profile(grid, l, fit_options);
  const std::string csv = beam_fit_csv(fit, l);
  if (options.output_dir) {
    std::error_code ec;
    fs::create_directories(*options.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + options.output_dir->string());
    write_text(*options.output_dir / "beam_fit.csv", csv);
  }
  out << csv;
  return fit;
}

}  // namespace spdc
