#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdc/analysis.hpp"
#include "spdc/beam.hpp"
#include "spdc/optics.hpp"
#include "spdc/ring_synth.hpp"

namespace spdc {

// Flat `section.key = value` run configuration with `#` comments. Every key
// has a default, so an empty file is a valid configuration. Lists and pairs
// are comma separated.

enum class SweepKind { kWidth, kOrder, kCritical };

std::string_view to_string(SweepKind kind);
std::optional<SweepKind> parse_sweep_kind(std::string_view text);

struct CrystalConfig {
  SellmeierCoefficients<double> ordinary = bbo().ordinary;
  SellmeierCoefficients<double> extraordinary = bbo().extraordinary;
  double theta_deg = 29.7;
  Aperture aperture{6.0, 6.0};

  bool operator==(const CrystalConfig&) const = default;
};

struct SweepConfig {
  std::optional<SweepKind> kind;
  std::vector<double> sigmas_mm{0.3, 0.6, 0.9, 1.2, 1.5};  // width
  std::vector<int> orders{0, 1, 3, 5};                     // order
  double host_sigma_mm = 1.0;                              // order
  int l = 2;                                               // critical
  double sigma_min_mm = 0.05;                              // critical
  double sigma_max_mm = 1.0;                               // critical
  int steps = 20;                                          // critical

  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  CrystalConfig crystal;
  BeamSpec beam;
  double pump_wavelength_nm = 405.0;
  double filter_center_nm = 810.0;
  double filter_half_width_nm = 5.0;
  int filter_samples = 11;
  DetectorGeometry geometry;
  SweepConfig sweep;
  ProfileMode profile_mode = ProfileMode::kAzimuthal;
  int exclusion_px = 10;
  double direction_deg = 0.0;
  SynthesisPath synthesis_path = SynthesisPath::kConvolution;
  RingRaster raster = RingRaster::kBinary;
  bool clip_to_crystal = true;
  std::string output_dir = "spdc_out";
  std::uint64_t seed = 0;

  UniaxialCrystal<double> crystal_model() const;
  FilterBand band() const;
  SimulationSetup setup() const;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ParseError (with line number) on malformed lines or values, and
/// ValidationError (naming the key) on unknown keys or violated constraints.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

/// Every key, one per line, in a form parse_config reads back exactly.
std::string serialize_config(const RunConfig& config);

/// (key, value) pairs in serialization order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

void validate_config(const RunConfig& config);

}  // namespace spdc
