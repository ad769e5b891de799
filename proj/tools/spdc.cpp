#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spdc/commands.hpp"
#include "spdc/config.hpp"

namespace {

std::optional<std::filesystem::path> maybe_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

spdc::RunConfig load(const std::string& path) {
  try {
    return spdc::load_config(path);
  } catch (const spdc::Error& e) {
    throw spdc::StageError("config", e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPDC ring simulator for vortex-pumped type-I BBO"};
  app.set_version_flag("--version", spdc::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, image_path, kind_text;
  bool direct = false, fit_offset = false;
  int l = 0;
  double pitch_mm = 1.0;

  auto* simulate = app.add_subcommand("simulate", "Synthesize one SPDC ring image with profile and metrics");
  simulate->add_option("-c,--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--output", out_dir, "Output directory (default: output.dir)");
  simulate->add_flag("--direct", direct, "Use direct scatter synthesis instead of FFT convolution");

  auto* sweep = app.add_subcommand("sweep", "Run a pump-width, vortex-order or critical-width sweep");
  sweep->add_option("-c,--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--kind", kind_text, "Sweep kind")
      ->required()
      ->check(CLI::IsMember({"width", "order", "critical"}));
  sweep->add_option("-o,--output", out_dir, "Output directory (default: output.dir)");

  auto* fit = app.add_subcommand("fit-beam", "Fit a vortex beam profile to a PGM or CSV image");
  fit->add_option("-i,--image", image_path, "Image file (.pgm or .csv)")->required()->check(CLI::ExistingFile);
  fit->add_option("--l", l, "Vortex order")->required()->check(CLI::NonNegativeNumber);
  fit->add_option("--pitch-mm", pitch_mm, "Pixel pitch for PGM input")->check(CLI::PositiveNumber);
  fit->add_option("-o,--output", out_dir, "Directory for beam_fit.csv");
  fit->add_flag("--offset", fit_offset, "Also fit a constant background");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      spdc::SimulateOptions options;
      options.output_dir = maybe_path(out_dir);
      options.direct = direct;
      const auto result = spdc::cmd_simulate(load(config_path), options);
      for (const auto& f : result.files) std::cout << f.string() << "\n";
      return result.exit_code;
    }
    if (*sweep) {
      const auto result =
          spdc::cmd_sweep(load(config_path), *spdc::parse_sweep_kind(kind_text), maybe_path(out_dir),
                          &std::cerr);
      for (const auto& f : result.files) std::cout << f.string() << "\n";
      return result.exit_code;
    }
    spdc::FitBeamOptions options;
    options.pgm_pitch_mm = pitch_mm;
    options.output_dir = maybe_path(out_dir);
    options.fit_offset = fit_offset;
    spdc::cmd_fit_beam(image_path, l, options, std::cout);
    return 0;
  } catch (const spdc::ConvergenceError& e) {
    std::cerr << "spdc: fit did not converge: " << e.what() << " (rms residual " << e.final_residual() << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "spdc: " << e.what() << "\n";
  }
  return 1;
}
