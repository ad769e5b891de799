#include "spdc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spdc/errors.hpp"
#include "spdc/image_io.hpp"

namespace spdc {

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kWidth:
      return "width";
    case SweepKind::kOrder:
      return "order";
    case SweepKind::kCritical:
      return "critical";
  }
  return "width";
}

std::optional<SweepKind> parse_sweep_kind(std::string_view text) {
  if (text == "width") return SweepKind::kWidth;
  if (text == "order") return SweepKind::kOrder;
  if (text == "critical") return SweepKind::kCritical;
  return std::nullopt;
}

UniaxialCrystal<double> RunConfig::crystal_model() const {
  UniaxialCrystal<double> c;
  c.ordinary = crystal.ordinary;
  c.extraordinary = crystal.extraordinary;
  c.optic_axis_angle = deg_to_rad(crystal.theta_deg);
  c.aperture = crystal.aperture;
  return c;
}

FilterBand RunConfig::band() const {
  return FilterBand::top_hat(filter_center_nm, filter_half_width_nm, filter_samples);
}

SimulationSetup RunConfig::setup() const {
  SimulationSetup s;
  s.crystal = crystal_model();
  s.pump = Wavelength::from_nm(pump_wavelength_nm);
  s.band = band();
  s.detector = geometry;
  s.path = synthesis_path;
  s.synthesis.raster = raster;
  s.profile.mode = profile_mode;
  s.profile.exclusion_px = exclusion_px;
  s.profile.direction_rad = deg_to_rad(direction_deg);
  s.clip_to_crystal = clip_to_crystal;
  return s;
}

namespace {

// Value parsers throw std::invalid_argument; the caller adds the line number.

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(',', start);
    out.push_back(trim(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

template <typename Int>
Int parse_integer(std::string_view s) {
  Int v{};
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

std::pair<double, double> parse_pair(std::string_view s) {
  const auto parts = split_list(s);
  if (parts.size() != 2) throw std::invalid_argument("expected two comma-separated numbers");
  return {parse_number(parts[0]), parse_number(parts[1])};
}

std::string format_pair(double a, double b) { return format_number(a) + "," + format_number(b); }

template <typename T, typename Format>
std::string join(const std::vector<T>& v, Format&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> parse;
  std::function<std::string(const RunConfig&)> format;
};

Field number_field(std::string key, double RunConfig::*member) {
  return {std::move(key), [member](RunConfig& c, std::string_view v) { c.*member = parse_number(v); },
          [member](const RunConfig& c) { return format_number(c.*member); }};
}

template <typename Get>
Field number_at(std::string key, Get get) {
  return {std::move(key), [get](RunConfig& c, std::string_view v) { get(c) = parse_number(v); },
          [get](const RunConfig& c) { return format_number(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field int_at(std::string key, Get get) {
  return {std::move(key), [get](RunConfig& c, std::string_view v) { get(c) = parse_integer<int>(v); },
          [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); }};
}

std::vector<Field> sellmeier_fields(const std::string& prefix, SellmeierCoefficients<double> CrystalConfig::*which) {
  std::vector<Field> out;
  const std::pair<const char*, double SellmeierCoefficients<double>::*> parts[] = {
      {"a", &SellmeierCoefficients<double>::a},
      {"b", &SellmeierCoefficients<double>::b},
      {"c", &SellmeierCoefficients<double>::c},
      {"d", &SellmeierCoefficients<double>::d}};
  for (const auto& [name, member] : parts) {
    out.push_back(number_at(prefix + "." + name, [which, member](RunConfig& c) -> double& {
      return (c.crystal.*which).*member;
    }));
  }
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    for (auto& x : sellmeier_fields("crystal.sellmeier_o", &CrystalConfig::ordinary)) f.push_back(std::move(x));
    for (auto& x : sellmeier_fields("crystal.sellmeier_e", &CrystalConfig::extraordinary)) f.push_back(std::move(x));
    f.push_back(number_at("crystal.theta_deg", [](RunConfig& c) -> double& { return c.crystal.theta_deg; }));
    f.push_back({"crystal.aperture_mm",
                 [](RunConfig& c, std::string_view v) {
                   const auto [w, h] = parse_pair(v);
                   c.crystal.aperture = {w, h};
                 },
                 [](const RunConfig& c) { return format_pair(c.crystal.aperture.width_mm, c.crystal.aperture.height_mm); }});

    f.push_back(int_at("beam.l", [](RunConfig& c) -> int& { return c.beam.l; }));
    f.push_back(number_at("beam.sigma_mm", [](RunConfig& c) -> double& { return c.beam.sigma_mm; }));
    f.push_back(number_at("beam.i0", [](RunConfig& c) -> double& { return c.beam.i0; }));
    f.push_back({"beam.center_mm",
                 [](RunConfig& c, std::string_view v) {
                   const auto [x, y] = parse_pair(v);
                   c.beam.center_mm = {x, y};
                 },
                 [](const RunConfig& c) { return format_pair(c.beam.center_mm.x(), c.beam.center_mm.y()); }});
    f.push_back(number_field("beam.wavelength_nm", &RunConfig::pump_wavelength_nm));

    f.push_back(number_field("filter.center_nm", &RunConfig::filter_center_nm));
    f.push_back(number_field("filter.half_width_nm", &RunConfig::filter_half_width_nm));
    f.push_back(int_at("filter.samples", [](RunConfig& c) -> int& { return c.filter_samples; }));

    f.push_back(number_at("geometry.z_mm", [](RunConfig& c) -> double& { return c.geometry.z_mm; }));
    f.push_back(int_at("geometry.nx", [](RunConfig& c) -> int& { return c.geometry.nx; }));
    f.push_back(int_at("geometry.ny", [](RunConfig& c) -> int& { return c.geometry.ny; }));
    f.push_back(number_at("geometry.pitch_mm", [](RunConfig& c) -> double& { return c.geometry.pitch_mm; }));

    f.push_back({"sweep.kind",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "none") {
                     c.sweep.kind.reset();
                     return;
                   }
                   const auto kind = parse_sweep_kind(v);
                   if (!kind) throw std::invalid_argument("sweep kind must be width, order, critical or none");
                   c.sweep.kind = kind;
                 },
                 [](const RunConfig& c) { return c.sweep.kind ? std::string(to_string(*c.sweep.kind)) : "none"; }});
    f.push_back({"sweep.sigmas_mm",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep.sigmas_mm.clear();
                   for (auto part : split_list(v)) c.sweep.sigmas_mm.push_back(parse_number(part));
                 },
                 [](const RunConfig& c) { return join(c.sweep.sigmas_mm, format_number); }});
    f.push_back({"sweep.orders",
                 [](RunConfig& c, std::string_view v) {
                   c.sweep.orders.clear();
                   for (auto part : split_list(v)) c.sweep.orders.push_back(parse_integer<int>(part));
                 },
                 [](const RunConfig& c) { return join(c.sweep.orders, [](int l) { return std::to_string(l); }); }});
    f.push_back(number_at("sweep.sigma_mm", [](RunConfig& c) -> double& { return c.sweep.host_sigma_mm; }));
    f.push_back(int_at("sweep.l", [](RunConfig& c) -> int& { return c.sweep.l; }));
    f.push_back(number_at("sweep.sigma_min_mm", [](RunConfig& c) -> double& { return c.sweep.sigma_min_mm; }));
    f.push_back(number_at("sweep.sigma_max_mm", [](RunConfig& c) -> double& { return c.sweep.sigma_max_mm; }));
    f.push_back(int_at("sweep.steps", [](RunConfig& c) -> int& { return c.sweep.steps; }));

    f.push_back({"analysis.profile",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "azimuthal") c.profile_mode = ProfileMode::kAzimuthal;
                   else if (v == "line-cut") c.profile_mode = ProfileMode::kLineCut;
                   else throw std::invalid_argument("profile must be azimuthal or line-cut");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.profile_mode == ProfileMode::kAzimuthal ? "azimuthal" : "line-cut");
                 }});
    f.push_back(int_at("analysis.exclusion_px", [](RunConfig& c) -> int& { return c.exclusion_px; }));
    f.push_back(number_field("analysis.direction_deg", &RunConfig::direction_deg));

    f.push_back({"synthesis.path",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "convolution") c.synthesis_path = SynthesisPath::kConvolution;
                   else if (v == "direct") c.synthesis_path = SynthesisPath::kDirect;
                   else throw std::invalid_argument("path must be convolution or direct");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.synthesis_path == SynthesisPath::kDirect ? "direct" : "convolution");
                 }});
    f.push_back({"synthesis.raster",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "binary") c.raster = RingRaster::kBinary;
                   else if (v == "antialiased") c.raster = RingRaster::kAntialiased;
                   else throw std::invalid_argument("raster must be binary or antialiased");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.raster == RingRaster::kBinary ? "binary" : "antialiased");
                 }});
    f.push_back({"synthesis.clip_to_crystal",
                 [](RunConfig& c, std::string_view v) { c.clip_to_crystal = parse_bool(v); },
                 [](const RunConfig& c) { return std::string(c.clip_to_crystal ? "true" : "false"); }});

    f.push_back({"output.dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
                 [](const RunConfig& c) { return c.output_dir; }});
    f.push_back({"run.seed", [](RunConfig& c, std::string_view v) { c.seed = parse_integer<std::uint64_t>(v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

void require(bool ok, const char* key, const char* constraint) {
  if (!ok) throw ValidationError(key, constraint);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'section.key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.empty()) throw ParseError(line_no, "missing value for " + std::string(key));
    const Field* field = find_field(key);
    if (!field) throw ValidationError(std::string(key), "unknown key");
    if (!seen.insert(std::string(key)).second) throw ParseError(line_no, "duplicate key " + std::string(key));
    try {
      field->parse(config, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, std::string(key) + ": " + e.what());
    } catch (const std::out_of_range& e) {
      throw ParseError(line_no, std::string(key) + ": value out of range");
    }
  }
  validate_config(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.format(config));
  return out;
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& [key, value] : config_entries(config)) out += key + " = " + value + "\n";
  return out;
}

void validate_config(const RunConfig& c) {
  require(c.crystal.theta_deg > 0 && c.crystal.theta_deg < 90, "crystal.theta_deg", "must lie in (0, 90)");
  require(c.crystal.aperture.width_mm > 0 && c.crystal.aperture.height_mm > 0, "crystal.aperture_mm",
          "must be positive");
  try {
    validate_crystal(c.crystal_model());
  } catch (const DomainError& e) {
    throw ValidationError("crystal.sellmeier", e.what());
  }

  require(c.beam.l >= 0, "beam.l", "must be >= 0");
  require(c.beam.sigma_mm > 0, "beam.sigma_mm", "must be > 0");
  require(c.beam.i0 > 0, "beam.i0", "must be > 0");
  require(c.beam.center_mm.allFinite(), "beam.center_mm", "must be finite");
  require(c.pump_wavelength_nm >= 200 && c.pump_wavelength_nm <= 1500, "beam.wavelength_nm",
          "must lie in [200, 1500]");

  require(c.filter_samples >= 1 && c.filter_samples % 2 == 1, "filter.samples", "must be an odd integer >= 1");
  require(c.filter_half_width_nm >= 0, "filter.half_width_nm", "must be >= 0");
  require(c.filter_center_nm - c.filter_half_width_nm > c.pump_wavelength_nm, "filter.center_nm",
          "band must lie above the pump wavelength");

  require(c.geometry.z_mm > 0, "geometry.z_mm", "must be > 0");
  require(c.geometry.nx >= 16, "geometry.nx", "must be >= 16");
  require(c.geometry.ny >= 16, "geometry.ny", "must be >= 16");
  require(c.geometry.pitch_mm > 0, "geometry.pitch_mm", "must be > 0");

  require(!c.sweep.sigmas_mm.empty(), "sweep.sigmas_mm", "must not be empty");
  for (std::size_t i = 0; i < c.sweep.sigmas_mm.size(); ++i) {
    require(c.sweep.sigmas_mm[i] > 0, "sweep.sigmas_mm", "values must be > 0");
    require(i == 0 || c.sweep.sigmas_mm[i] > c.sweep.sigmas_mm[i - 1], "sweep.sigmas_mm", "must be ascending");
  }
  require(!c.sweep.orders.empty(), "sweep.orders", "must not be empty");
  for (int l : c.sweep.orders) require(l >= 0, "sweep.orders", "values must be >= 0");
  require(c.sweep.host_sigma_mm > 0, "sweep.sigma_mm", "must be > 0");
  require(c.sweep.l >= 1, "sweep.l", "must be >= 1");
  require(c.sweep.sigma_min_mm > 0, "sweep.sigma_min_mm", "must be > 0");
  require(c.sweep.sigma_max_mm > c.sweep.sigma_min_mm, "sweep.sigma_max_mm", "must exceed sweep.sigma_min_mm");
  require(c.sweep.steps >= kPlateauSamples + 1, "sweep.steps", "must be >= 4");

  require(c.exclusion_px >= 0, "analysis.exclusion_px", "must be >= 0");
  require(std::isfinite(c.direction_deg), "analysis.direction_deg", "must be finite");
  require(!c.output_dir.empty(), "output.dir", "must not be empty");
}

}  // namespace spdc
