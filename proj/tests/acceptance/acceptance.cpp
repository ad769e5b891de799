// Acceptance runner: `acceptance N` checks criterion N, `acceptance` checks
// all of them. Prints one PASS/FAIL line per criterion and exits nonzero if
// any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spdc/analysis.hpp"
#include "spdc/beam.hpp"
#include "spdc/commands.hpp"
#include "spdc/config.hpp"
#include "spdc/image_io.hpp"
#include "spdc/optics.hpp"
#include "spdc/phasematch.hpp"
#include "spdc/ring_synth.hpp"

namespace fs = std::filesystem;
using spdc::Wavelength;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

const double kTheta = spdc::deg_to_rad(29.7);

double rad2deg(double r) { return r * 180 / std::numbers::pi; }

spdc::BeamSpec beam(int l, double sigma) {
  spdc::BeamSpec b;
  b.l = l;
  b.sigma_mm = sigma;
  return b;
}

double relative_l2(const spdc::ImageArray& a, const spdc::ImageArray& b) {
  return std::sqrt((a - b).square().sum() / b.square().sum());
}

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 ----------------------------------------------------------------------
void dispersion(Outcome& out) {
  const auto crystal = spdc::bbo();
  struct Row {
    const char* label;
    double value, oracle, stated;
  };
  const Row rows[] = {
      {"n_o(405)", spdc::ordinary_index(crystal, Wavelength::from_nm(405)), double(oracle::n_o(405)), 1.6919},
      {"n_e(405)", spdc::extraordinary_index(crystal, Wavelength::from_nm(405)), double(oracle::n_e(405)), 1.5671},
      {"n_o(810)", spdc::ordinary_index(crystal, Wavelength::from_nm(810)), double(oracle::n_o(810)), 1.6603},
      {"n_e(405,29.7)", spdc::n_extraordinary_at_angle(crystal, Wavelength::from_nm(405), kTheta),
       double(oracle::n_e_theta(405, oracle::real(kTheta))), 1.6585},
  };
  for (const auto& r : rows) {
    out.detail << " " << r.label << "=" << std::fixed;
    out.detail.precision(6);
    out.detail << r.value;
    out.require(std::abs(r.value - r.oracle) < 1e-4, std::string(r.label) + " vs oracle");
    out.require(std::abs(r.value - r.stated) < 1e-4, std::string(r.label) + " vs stated value");
  }
}

// 2 ----------------------------------------------------------------------
void phase_matching(Outcome& out) {
  const auto sol = spdc::solve_emission_angles(spdc::bbo(), kTheta, Wavelength::from_nm(405), Wavelength::from_nm(810));
  const auto ref = oracle::emission_angles(405.0L, 810.0L, oracle::real(kTheta));
  const double internal = rad2deg(sol.signal_internal), external = rad2deg(sol.signal_external);
  const double ref_ext = double(oracle::refract(ref.signal, oracle::n_o(810)));
  out.detail.precision(4);
  out.detail << std::fixed << " internal=" << internal << "deg external=" << external << "deg";
  out.require(std::abs(internal - 2.62) <= 0.05, "internal 2.62 +- 0.05");
  out.require(std::abs(external - 4.36) <= 0.10, "external 4.36 +- 0.10");
  out.require(std::abs(sol.signal_internal - double(ref.signal)) < 1e-9, "internal vs bisection oracle");
  out.require(std::abs(sol.signal_external - ref_ext) < 1e-9, "external vs Snell oracle");
}

// 3 ----------------------------------------------------------------------
void solver_equivalence(Outcome& out) {
  const auto crystal = spdc::bbo();
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const double nm = 805 + 10.0 * k / 49;
    const auto sol = spdc::solve_emission_angles(crystal, kTheta, Wavelength::from_nm(405), Wavelength::from_nm(nm));
    const auto ref = oracle::emission_angles(405.0L, oracle::real(nm), oracle::real(kTheta));
    worst = std::max({worst, std::abs(sol.signal_internal - double(ref.signal)),
                      std::abs(sol.idler_internal - double(ref.idler))});
  }
  out.detail << " worst=" << worst << "rad over 50 wavelengths";
  out.require(worst < 1e-9, "agreement < 1e-9 rad");
}

// 4 ----------------------------------------------------------------------
void width_sweep(Outcome& out) {
  const auto sweep = spdc::sweep_pump_width({0.3, 0.6, 0.9, 1.2, 1.5}, spdc::SimulationSetup{});
  out.detail << " sigma_ring=";
  bool increasing = true;
  for (std::size_t k = 0; k < sweep.rows.size(); ++k) {
    out.detail << (k ? "," : "") << sweep.rows[k].sigma_ring_mm;
    if (k && !(sweep.rows[k].sigma_ring_mm > sweep.rows[k - 1].sigma_ring_mm)) increasing = false;
  }
  out.require(increasing, "strictly increasing");
  out.require(sweep.line.has_value(), "line fit present");
  if (sweep.line) {
    out.detail << " slope=" << sweep.line->slope << " r2=" << sweep.line->r2;
    out.require(sweep.line->r2 > 0.99, "R^2 > 0.99");
  }
}

// 5 ----------------------------------------------------------------------
void dual_rings(Outcome& out) {
  const spdc::SimulationSetup setup;
  const auto kernels = spdc::build_kernels(setup);
  for (int l : {0, 1, 3, 5}) {
    const auto profile = spdc::radial_profile(spdc::simulate_ring(beam(l, 1.0), setup, kernels));
    const auto m = spdc::detect_dual_rings(profile);
    out.detail << " l=" << l << ":" << (m.dual_ring ? "dual" : "single") << "/sep=" << m.separation_mm;
    if (l == 0) {
      out.require(!m.dual_ring, "l=0 single");
    } else {
      out.require(m.dual_ring && m.separation_mm > 0, "l=" + std::to_string(l) + " dual with separation");
    }
  }
}

// 6 ----------------------------------------------------------------------
void order_trend(Outcome& out) {
  const auto rows = spdc::sweep_vortex_order({0, 1, 3, 5}, 1.0, spdc::SimulationSetup{});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.detail << " l=" << rows[k].l << ":fwhm=" << rows[k].fwhm_mm << "/sep=" << rows[k].separation_mm;
    if (k) {
      out.require(rows[k].fwhm_mm >= rows[k - 1].fwhm_mm, "fwhm non-decreasing at l=" + std::to_string(rows[k].l));
      out.require(rows[k].separation_mm >= rows[k - 1].separation_mm,
                  "separation non-decreasing at l=" + std::to_string(rows[k].l));
    }
  }
}

// 7 ----------------------------------------------------------------------
void critical_width(Outcome& out) {
  const double lo = 0.05, hi = 1.0;
  const auto rows = spdc::sweep_critical_rows(2, lo, hi, 20, spdc::SimulationSetup{});
  double pmin = rows[0].fwhm_mm, pmax = rows[0].fwhm_mm, psum = 0;
  for (int k = 0; k < 3; ++k) {
    pmin = std::min(pmin, rows[k].fwhm_mm);
    pmax = std::max(pmax, rows[k].fwhm_mm);
    psum += rows[k].fwhm_mm;
  }
  const double variation = (pmax - pmin) / (psum / 3);
  out.detail << " plateau variation=" << 100 * variation << "%";
  out.require(variation < 0.02, "plateau variation < 2% over the 3 lowest sigma");

  try {
    const auto crit = spdc::critical_width_from_rows(rows);
    out.detail << " sigma_crit=" << crit.sigma_crit_mm << "mm";
    out.require(crit.sigma_crit_mm > lo && crit.sigma_crit_mm < hi, "sigma_crit strictly inside the range");
    bool rising = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k - 1].sigma_mm >= crit.sigma_crit_mm && rows[k].fwhm_mm < rows[k - 1].fwhm_mm) rising = false;
    out.require(rising, "monotone rise beyond sigma_crit");
  } catch (const spdc::NoTransitionError& e) {
    out.require(false, std::string("transition found: ") + e.what());
  }
  out.detail << " fwhm=";
  for (std::size_t k = 0; k < rows.size(); ++k) out.detail << (k ? "," : "") << rows[k].fwhm_mm;
}

// 8 ----------------------------------------------------------------------
spdc::IntensityGrid random_pump(oracle::Gen& gen, const spdc::DetectorGeometry& d) {
  spdc::IntensityGrid pump(d.grid());
  const int spots = gen.integer(1, 3);
  for (int s = 0; s < spots; ++s) {
    spdc::BeamSpec b;
    b.l = gen.integer(0, 3);
    b.sigma_mm = gen.uniform(0.05, 0.25);
    b.i0 = gen.uniform(0.5, 2.0);
    b.center_mm = {gen.uniform(-0.15, 0.15), gen.uniform(-0.15, 0.15)};
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        pump.values(j, i) += spdc::beam_intensity(b, pump.geometry.x(i), pump.geometry.y(j));
  }
  return pump;
}

void path_equivalence(Outcome& out) {
  oracle::Gen gen(2024);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    spdc::DetectorGeometry det;
    det.nx = gen.integer(96, 160);
    det.ny = gen.integer(96, 160);
    det.pitch_mm = gen.uniform(0.03, 0.06);
    det.z_mm = std::min(det.nx, det.ny) * det.pitch_mm * gen.uniform(2.5, 4.0);
    spdc::SimulationSetup setup;
    setup.detector = det;
    setup.band = spdc::FilterBand::top_hat(810, gen.uniform(1, 5), 2 * gen.integer(1, 5) + 1);
    const auto kernels = spdc::build_kernels(setup);
    const auto pump = random_pump(gen, det);
    spdc::SynthesisOptions opts;
    opts.raster = gen.coin() ? spdc::RingRaster::kBinary : spdc::RingRaster::kAntialiased;
    const auto a = spdc::synthesize_direct(pump, kernels, det, opts);
    const auto b = spdc::synthesize_convolution(pump, kernels, det, opts);
    worst = std::max(worst, relative_l2(b.values, a.values));
  }
  out.detail << " worst relative L2=" << worst << " over 20 cases";
  out.require(worst < 1e-6, "relative L2 < 1e-6");

  // Benchmark on the default 512x512 setup.
  const spdc::SimulationSetup setup;
  const auto kernels = spdc::build_kernels(setup);
  for (double sigma : {0.3, 1.0}) {
    const auto pump = spdc::render_pump(beam(0, sigma), setup);
    spdc::SpdcImage a, b;
    const double td = seconds([&] { a = spdc::synthesize_direct(pump, kernels, setup.detector); });
    const double tc = seconds([&] { b = spdc::synthesize_convolution(pump, kernels, setup.detector); });
    const double err = relative_l2(b.values, a.values);
    std::printf("  benchmark 512x512 sigma=%.1fmm kernels=%zu: direct %.3fs convolution %.3fs (x%.1f) relL2=%.2e\n",
                sigma, kernels.size(), td, tc, td / tc, err);
    out.require(err < 1e-6, "benchmark case relative L2 < 1e-6");
  }
}

// 9 ----------------------------------------------------------------------
spdc::RingKernel kernel(double rs, double ri, double w) {
  spdc::RingKernel k;
  k.triplet = spdc::make_triplet(Wavelength::from_nm(405), Wavelength::from_nm(810));
  k.signal_radius_mm = rs;
  k.idler_radius_mm = ri;
  k.weight = w;
  return k;
}

std::vector<std::string> manifest_file_lines(const fs::path& manifest) {
  std::ifstream in(manifest);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (line.rfind("file ", 0) == 0) out.push_back(line);
  return out;
}

void properties(Outcome& out) {
  oracle::Gen gen(77);
  spdc::DetectorGeometry det;
  det.nx = det.ny = 112;
  det.pitch_mm = 0.05;
  const std::vector kernels{kernel(1.0, 1.3, 0.4), kernel(1.5, 0.8, 0.6)};

  // Linearity on both paths.
  double lin = 0;
  for (int t = 0; t < 4; ++t) {
    const auto a = random_pump(gen, det), b = random_pump(gen, det);
    const double alpha = gen.uniform(0.1, 3), beta = gen.uniform(0.1, 3);
    const spdc::IntensityGrid mix(det.grid(), alpha * a.values + beta * b.values);
    for (bool direct : {true, false}) {
      auto run = [&](const spdc::IntensityGrid& p) {
        return direct ? spdc::synthesize_direct(p, kernels, det).values
                      : spdc::synthesize_convolution(p, kernels, det).values;
      };
      lin = std::max(lin, relative_l2(run(mix), alpha * run(a) + beta * run(b)));
    }
  }
  out.detail << " linearity=" << lin;
  out.require(lin < 1e-12, "linearity");

  // Whole-pixel translation.
  const auto pump = random_pump(gen, det);
  spdc::IntensityGrid base(det.grid()), moved(det.grid());
  base.values.block(20, 20, 72, 72) = pump.values.block(20, 20, 72, 72);
  moved.values.block(23, 16, 72, 72) = pump.values.block(20, 20, 72, 72);
  const auto ia = spdc::synthesize_direct(base, kernels, det).values;
  const auto ib = spdc::synthesize_direct(moved, kernels, det).values;
  const double shift = (ib.block(33, 26, 52, 52) - ia.block(30, 30, 52, 52)).abs().maxCoeff();
  out.detail << " translation=" << shift;
  out.require(shift < 1e-12, "translation covariance");

  // Conservation.
  double expected = 0;
  for (const auto& k : kernels)
    expected += k.weight * pump.total() *
                double(spdc::ring_stencil(k.signal_radius_mm / det.pitch_mm).size() +
                       spdc::ring_stencil(k.idler_radius_mm / det.pitch_mm).size());
  const double total = spdc::synthesize_direct(pump, kernels, det).values.sum();
  out.detail << " conservation=" << std::abs(total / expected - 1);
  out.require(std::abs(total / expected - 1) < 1e-12, "conservation");

  // Beam fit round trip.
  double beam_err = 0;
  for (int l : {0, 1, 3, 5})
    for (double sigma : {0.3, 1.0}) {
      spdc::BeamSpec s = beam(l, sigma);
      s.i0 = 2.0;
      s.center_mm = {0.04 * sigma, -0.02 * sigma};
      const auto fit = spdc::fit_beam_profile(spdc::render_beam(s, spdc::default_beam_geometry(s, 160)), l);
      beam_err = std::max({beam_err, std::abs(fit.sigma_mm / sigma - 1), std::abs(fit.i0 / 2.0 - 1)});
    }
  out.detail << " beam_fit=" << beam_err;
  out.require(beam_err < 0.005, "beam fit round trip within 0.5%");

  // Ring fit round trip and fwhm scale invariance.
  double ring_err = 0, scale_err = 0;
  for (int t = 0; t < 40; ++t) {
    const double bin = 0.02, w = gen.uniform(2, 50) * bin, r0 = 6 * w + gen.uniform(0, 1);
    spdc::RadialProfile p;
    p.bin_width_mm = bin;
    for (double r = 0; r <= r0 + 6 * w; r += bin) {
      p.radii_mm.push_back(r);
      p.intensity.push_back(std::exp(-(r - r0) * (r - r0) / (w * w)));
    }
    ring_err = std::max(ring_err, std::abs(spdc::fit_ring_gaussian(p).sigma_ring_mm / w - 1));
    const double f = spdc::fwhm(p), c = std::pow(10.0, gen.uniform(-5, 5));
    for (auto& v : p.intensity) v *= c;
    scale_err = std::max(scale_err, std::abs(spdc::fwhm(p) / f - 1));
  }
  out.detail << " ring_fit=" << ring_err << " fwhm_scale=" << scale_err;
  out.require(ring_err < 0.01, "ring fit round trip within 1%");
  out.require(scale_err < 1e-12, "fwhm scale invariance");

  // Config round trip.
  bool round_trip = true;
  for (int t = 0; t < 100; ++t) {
    spdc::RunConfig c;
    c.crystal.theta_deg = gen.uniform(20, 40);
    c.beam.l = gen.integer(0, 6);
    c.beam.sigma_mm = gen.uniform(0.05, 2);
    c.beam.center_mm = {gen.uniform(-1, 1), gen.uniform(-1, 1)};
    c.filter_half_width_nm = gen.uniform(0.5, 8);
    c.geometry.z_mm = gen.uniform(20, 200);
    c.geometry.pitch_mm = gen.uniform(0.01, 0.1);
    c.sweep.sigmas_mm = {gen.uniform(0.1, 0.5), gen.uniform(0.6, 2)};
    c.clip_to_crystal = gen.coin();
    if (!(spdc::parse_config(spdc::serialize_config(c)) == c)) round_trip = false;
  }
  out.require(round_trip, "config round trip");

  // Bit-identical reruns.
  const auto root = fs::temp_directory_path() / "spdc_acceptance";
  fs::remove_all(root);
  auto config = spdc::parse_config("beam.l = 3\nbeam.sigma_mm = 0.6\n");
  spdc::cmd_simulate(config, {root / "a", false});
  spdc::cmd_simulate(config, {root / "b", false});
  const auto fa = manifest_file_lines(root / "a" / "manifest.txt");
  const auto fb = manifest_file_lines(root / "b" / "manifest.txt");
  out.detail << " rerun files=" << fa.size();
  out.require(!fa.empty() && fa == fb, "identical checksums on rerun");
}

const std::vector<Criterion> kCriteria = {
    {1, "dispersion", 1, dispersion},
    {2, "phase matching", 1, phase_matching},
    {3, "solver equivalence", 5, solver_equivalence},
    {4, "pump width sweep", 120, width_sweep},
    {5, "dual ring formation", 120, dual_rings},
    {6, "vortex order trend", 120, order_trend},
    {7, "critical width", 180, critical_width},
    {8, "path equivalence", 120, path_equivalence},
    {9, "property suites", 120, properties},
};

bool run(const Criterion& c) {
  Outcome out;
  double elapsed = 0;
  try {
    elapsed = seconds([&] { c.run(out); });
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  out.require(elapsed < c.budget_s, "runtime budget " + std::to_string(int(c.budget_s)) + "s");
  std::printf("[%s] C%d %s (%.2fs):%s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, elapsed, out.detail.str().c_str());
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  bool ok = true;
  if (argc < 2) {
    for (const auto& c : kCriteria) ok = run(c) && ok;
    return ok ? 0 : 1;
  }
  for (int k = 1; k < argc; ++k) {
    const int id = std::atoi(argv[k]);
    if (id < 1 || id > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[k]);
      return 2;
    }
    ok = run(kCriteria[id - 1]) && ok;
  }
  return ok ? 0 : 1;
}
