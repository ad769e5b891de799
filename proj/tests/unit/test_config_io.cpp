#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "spdc/config.hpp"
#include "spdc/errors.hpp"
#include "spdc/image_io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "spdc_config_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <class E>
E catch_error(auto&& f) {
  try {
    f();
  } catch (const E& e) {
    return e;
  }
  FAIL("expected exception");
  throw;
}

spdc::RunConfig random_config(oracle::Gen& gen) {
  spdc::RunConfig c;
  c.crystal.theta_deg = gen.uniform(20, 40);
  c.crystal.ordinary.a = gen.uniform(2.5, 3.0);
  c.crystal.aperture = {gen.uniform(1, 10), gen.uniform(1, 10)};
  c.beam.l = gen.integer(0, 7);
  c.beam.sigma_mm = gen.uniform(0.01, 3);
  c.beam.i0 = gen.uniform(0.1, 1e3);
  c.beam.center_mm = {gen.uniform(-1, 1), gen.uniform(-1, 1)};
  c.pump_wavelength_nm = gen.uniform(380, 420);
  c.filter_center_nm = gen.uniform(790, 830);
  c.filter_half_width_nm = gen.uniform(0.5, 10);
  c.filter_samples = 2 * gen.integer(0, 10) + 1;
  c.geometry.z_mm = gen.uniform(10, 300);
  c.geometry.nx = gen.integer(16, 2048);
  c.geometry.ny = gen.integer(16, 2048);
  c.geometry.pitch_mm = gen.uniform(0.001, 0.2);
  if (gen.coin()) c.sweep.kind = static_cast<spdc::SweepKind>(gen.integer(0, 2));
  c.sweep.sigmas_mm = {gen.uniform(0.1, 0.5), gen.uniform(0.6, 1.0), gen.uniform(1.1, 2)};
  c.sweep.orders = {gen.integer(0, 3), gen.integer(0, 6)};
  c.sweep.host_sigma_mm = gen.uniform(0.1, 2);
  c.sweep.l = gen.integer(1, 6);
  c.sweep.sigma_min_mm = gen.uniform(0.01, 0.1);
  c.sweep.sigma_max_mm = gen.uniform(0.5, 2);
  c.sweep.steps = gen.integer(4, 40);
  c.profile_mode = gen.coin() ? spdc::ProfileMode::kAzimuthal : spdc::ProfileMode::kLineCut;
  c.exclusion_px = gen.integer(0, 20);
  c.direction_deg = gen.uniform(0, 180);
  c.synthesis_path = gen.coin() ? spdc::SynthesisPath::kDirect : spdc::SynthesisPath::kConvolution;
  c.raster = gen.coin() ? spdc::RingRaster::kBinary : spdc::RingRaster::kAntialiased;
  c.clip_to_crystal = gen.coin();
  c.output_dir = "out_" + std::to_string(gen.integer(0, 999));
  c.seed = static_cast<std::uint64_t>(gen.integer(0, 1 << 30)) << 20;
  return c;
}

}  // namespace

TEST_CASE("empty config yields the defaults") {
  const auto c = spdc::parse_config("");
  CHECK(c == spdc::RunConfig{});
  CHECK(c.crystal.theta_deg == 29.7);
  CHECK(c.pump_wavelength_nm == 405.0);
  CHECK(c.filter_center_nm == 810.0);
  CHECK(c.filter_half_width_nm == 5.0);
  CHECK(c.filter_samples == 11);
  CHECK(c.geometry.z_mm == 100.0);
  CHECK(c.geometry.nx == 512);
  CHECK(c.geometry.ny == 512);
  CHECK(c.geometry.pitch_mm == 0.05);
  CHECK(spdc::parse_config("# only a comment\n\n   \n") == spdc::RunConfig{});
}

TEST_CASE("theta is held in radians by the crystal model") {
  const auto c = spdc::parse_config("crystal.theta_deg = 29.7\n");
  CHECK(c.crystal_model().optic_axis_angle == doctest::Approx(29.7 * std::numbers::pi / 180).epsilon(1e-15));
  CHECK(c.setup().crystal.optic_axis_angle == c.crystal_model().optic_axis_angle);
}

TEST_CASE("validation errors name the key") {
  CHECK(catch_error<spdc::ValidationError>([] { spdc::parse_config("beam.l = -1\n"); }).key() == "beam.l");
  CHECK(catch_error<spdc::ValidationError>([] { spdc::parse_config("beam.sigma_mm = 0\n"); }).key() ==
        "beam.sigma_mm");
  CHECK(catch_error<spdc::ValidationError>([] { spdc::parse_config("filter.samples = 4\n"); }).key() ==
        "filter.samples");
  CHECK(catch_error<spdc::ValidationError>([] { spdc::parse_config("crystal.theta_deg = 95\n"); }).key() ==
        "crystal.theta_deg");
  CHECK(catch_error<spdc::ValidationError>([] { spdc::parse_config("sweep.sigmas_mm = 0.5, 0.3\n"); }).key() ==
        "sweep.sigmas_mm");
  CHECK(catch_error<spdc::ValidationError>([] { spdc::parse_config("beam.colour = red\n"); }).key() ==
        "beam.colour");
}

TEST_CASE("parse errors carry the line number") {
  CHECK(catch_error<spdc::ParseError>([] { spdc::parse_config("# c\nbeam.l = 1\nbeam.l\n"); }).line() == 3);
  CHECK(catch_error<spdc::ParseError>([] { spdc::parse_config("beam.l = one\n"); }).line() == 1);
  CHECK(catch_error<spdc::ParseError>([] { spdc::parse_config("\n\nbeam.sigma_mm =\n"); }).line() == 3);
  CHECK(catch_error<spdc::ParseError>([] { spdc::parse_config("beam.l = 1\nbeam.l = 2\n"); }).line() == 2);
  CHECK(catch_error<spdc::ParseError>([] { spdc::parse_config("synthesis.clip_to_crystal = maybe\n"); }).line() == 1);
  CHECK(catch_error<spdc::ParseError>([] { spdc::parse_config("sweep.kind = both\n"); }).line() == 1);
}

TEST_CASE("whitespace, comments and CRLF are tolerated") {
  const auto c = spdc::parse_config("  beam.l=3   # order\r\nbeam.sigma_mm =\t0.75\r\n");
  CHECK(c.beam.l == 3);
  CHECK(c.beam.sigma_mm == 0.75);
}

TEST_CASE("config round trip") {
  oracle::Gen gen(41);
  for (int k = 0; k < 200; ++k) {
    const auto c = random_config(gen);
    const auto text = spdc::serialize_config(c);
    CAPTURE(text);
    CHECK(spdc::parse_config(text) == c);
  }
  const auto entries = spdc::config_entries(spdc::RunConfig{});
  CHECK(entries.size() > 30);
  CHECK(entries.front().first == "crystal.sellmeier_o.a");
}

TEST_CASE("number formatting round trips") {
  oracle::Gen gen(2);
  for (int k = 0; k < 1000; ++k) {
    const double v = gen.uniform(-1, 1) * std::pow(10.0, gen.integer(-20, 20));
    CHECK(spdc::parse_number(spdc::format_number(v)) == v);
  }
  CHECK(spdc::format_number(0.1) == "0.1");
  CHECK_THROWS(spdc::parse_number("1.5x"));
  CHECK_THROWS(spdc::parse_number(""));
}

TEST_CASE("PGM write and read") {
  spdc::ImageArray img(3, 4);
  img << 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12;
  const auto p = scratch("small.pgm");
  spdc::write_pgm(p, img);
  const auto bytes = read_bytes(p);
  CHECK(bytes.substr(0, 13) == "P5\n4 3\n65535\n");
  CHECK(bytes.substr(bytes.size() - 2) == "\xff\xff");
  // Pixel (0,1) = 1/12 of the maximum: round(5461.25) = 5461 = 0x1555, big-endian.
  CHECK(bytes.substr(15, 2) == "\x15\x55");
  CHECK(bytes.size() == std::string("P5\n4 3\n65535\n").size() + 2 * 12);
  const auto back = spdc::read_pgm(p);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) CHECK(back(j, i) == std::round(img(j, i) / 12 * 65535));
}

TEST_CASE("8-bit PGM with comments") {
  const auto p = scratch("eight.pgm");
  {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n# made by hand\n2 2\n255\n";
    out.put(char(0)).put(char(10)).put(char(200)).put(char(255));
  }
  const auto img = spdc::read_pgm(p);
  CHECK(img(0, 1) == 10);
  CHECK(img(1, 1) == 255);
}

TEST_CASE("malformed PGM files raise I/O errors") {
  const auto p = scratch("bad.pgm");
  spdc::write_text(p, "P5\n4 4\n65535\n\x01\x02");
  CHECK_THROWS_AS(spdc::read_pgm(p), spdc::IoError);
  spdc::write_text(p, "P2\n1 1\n255\n7\n");
  CHECK_THROWS_AS(spdc::read_pgm(p), spdc::IoError);
  spdc::write_text(p, "P5\n-1 4\n255\n");
  CHECK_THROWS_AS(spdc::read_pgm(p), spdc::IoError);
  CHECK_THROWS_AS(spdc::read_pgm(scratch("missing.pgm")), spdc::IoError);
}

TEST_CASE("CSV grid round trip is exact") {
  oracle::Gen gen(9);
  spdc::ImageArray img(5, 7);
  for (Eigen::Index k = 0; k < img.size(); ++k) img.data()[k] = gen.uniform(0, 1) * 1e-7;
  const auto p = scratch("grid.csv");
  spdc::write_grid_csv(p, img, 0.05);
  const auto back = spdc::read_grid_csv(p);
  CHECK(back.pitch_mm == 0.05);
  CHECK((back.values == img).all());
  CHECK(read_bytes(p).find('\r') == std::string::npos);

  const auto grid = spdc::load_grid(p);
  CHECK(grid.geometry.pitch_mm == 0.05);
  CHECK(grid.geometry.center_mm().norm() < 1e-15);

  spdc::write_text(p, "nx,ny,pitch_mm\n3,2,0.1\n1,2,3\n4,5\n");
  CHECK_THROWS_AS(spdc::read_grid_csv(p), spdc::IoError);
}

TEST_CASE("SHA-256 of known inputs") {
  const auto p = scratch("hash.txt");
  spdc::write_text(p, "");
  CHECK(spdc::sha256_file(p) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  spdc::write_text(p, "abc");
  CHECK(spdc::sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
