#include <algorithm>
#include <sstream>

#include "spdc/analysis.hpp"
#include "spdc/errors.hpp"
#include "spdc/parallel.hpp"

namespace spdc {

std::vector<RingKernel> build_kernels(const SimulationSetup& setup) {
  return build_kernels(setup.crystal, setup.crystal.optic_axis_angle, setup.pump, setup.band, setup.detector);
}

IntensityGrid render_pump(const BeamSpec& beam, const SimulationSetup& setup) {
  IntensityGrid pump = render_beam(beam, setup.detector.grid());
  if (setup.clip_to_crystal) pump = clip_to_aperture(pump, setup.crystal.aperture);
  return pump;
}

SpdcImage simulate_ring(const BeamSpec& beam, const SimulationSetup& setup, std::span<const RingKernel> kernels) {
  const IntensityGrid pump = render_pump(beam, setup);
  if (setup.path == SynthesisPath::kDirect) return synthesize_direct(pump, kernels, setup.detector, setup.synthesis);
  return synthesize_convolution(pump, kernels, setup.detector, setup.synthesis);
}

SpdcImage simulate_ring(const BeamSpec& beam, const SimulationSetup& setup) {
  const auto kernels = build_kernels(setup);
  return simulate_ring(beam, setup, kernels);
}

namespace {

// Runs row(i) for every index, recording "<tag>: <message>" on failure.
template <typename Row, typename Compute, typename Tag>
void run_rows(std::vector<Row>& rows, Compute&& compute, Tag&& tag) {
  parallel_for(rows.size(), [&](std::size_t i) {
    try {
      compute(rows[i]);
    } catch (const std::exception& e) {
      rows[i].error = tag(rows[i]) + ": " + e.what();
    }
  });
}

template <typename Row>
void throw_first_failure(const std::vector<Row>& rows) {
  for (const auto& r : rows)
    if (r.error) throw Error(*r.error);
}

template <typename T>
std::string tagged(const char* key, T value) {
  std::ostringstream s;
  s << key << "=" << value;
  return s.str();
}

}  // namespace

WidthSweep sweep_pump_width(const std::vector<double>& sigmas_mm, const SimulationSetup& setup,
                            bool keep_failed_rows) {
  for (std::size_t i = 0; i < sigmas_mm.size(); ++i) {
    if (!(sigmas_mm[i] > 0)) throw DomainError("pump widths must be positive");
    if (i > 0 && !(sigmas_mm[i] > sigmas_mm[i - 1])) throw DomainError("pump widths must be ascending");
  }
  const auto kernels = build_kernels(setup);

  WidthSweep sweep;
  for (double s : sigmas_mm) sweep.rows.push_back({s, 0.0, std::nullopt});
  run_rows(
      sweep.rows,
      [&](WidthRow& row) {
        BeamSpec beam;
        beam.sigma_mm = row.sigma_pump_mm;
        const auto image = simulate_ring(beam, setup, kernels);
        row.sigma_ring_mm = fit_ring_gaussian(radial_profile(image, setup.profile)).sigma_ring_mm;
      },
      [](const WidthRow& row) { return tagged("sigma_pump_mm", row.sigma_pump_mm); });
  if (!keep_failed_rows) throw_first_failure(sweep.rows);

  std::vector<double> x, y;
  for (const auto& r : sweep.rows)
    if (!r.error) {
      x.push_back(r.sigma_pump_mm);
      y.push_back(r.sigma_ring_mm);
    }
  if (x.size() >= 2) sweep.line = fit_line(x, y);
  return sweep;
}

std::vector<OrderRow> sweep_vortex_order(std::vector<int> orders, double sigma_mm, const SimulationSetup& setup,
                                         bool keep_failed_rows) {
  if (!(sigma_mm > 0)) throw DomainError("host beam width must be positive");
  for (int l : orders)
    if (l < 0) throw DomainError("vortex orders must be non-negative");
  std::stable_sort(orders.begin(), orders.end());
  const auto kernels = build_kernels(setup);

  std::vector<OrderRow> rows;
  for (int l : orders) rows.push_back({l, 0.0, 0.0, false, std::nullopt});
  run_rows(
      rows,
      [&](OrderRow& row) {
        BeamSpec beam;
        beam.l = row.l;
        beam.sigma_mm = sigma_mm;
        const auto metrics = detect_dual_rings(radial_profile(simulate_ring(beam, setup, kernels), setup.profile));
        row.fwhm_mm = metrics.fwhm_mm;
        row.separation_mm = metrics.separation_mm;
        row.dual_ring = metrics.dual_ring;
      },
      [](const OrderRow& row) { return tagged("l", row.l); });
  if (!keep_failed_rows) throw_first_failure(rows);
  return rows;
}

std::vector<CriticalRow> sweep_critical_rows(int l, double sigma_min_mm, double sigma_max_mm, int steps,
                                             const SimulationSetup& setup, bool keep_failed_rows) {
  if (l < 1) throw DomainError("critical width needs a vortex order l >= 1");
  if (!(sigma_min_mm > 0 && sigma_max_mm > sigma_min_mm)) throw DomainError("sigma range must be positive and ascending");
  if (steps < kPlateauSamples + 1) throw DomainError("critical width sweep needs at least four steps");
  const auto kernels = build_kernels(setup);

  std::vector<CriticalRow> rows;
  for (int k = 0; k < steps; ++k)
    rows.push_back({sigma_min_mm + (sigma_max_mm - sigma_min_mm) * k / (steps - 1), 0.0, std::nullopt});
  run_rows(
      rows,
      [&](CriticalRow& row) {
        BeamSpec beam;
        beam.l = l;
        beam.sigma_mm = row.sigma_mm;
        row.fwhm_mm = fwhm(radial_profile(simulate_ring(beam, setup, kernels), setup.profile));
      },
      [](const CriticalRow& row) { return tagged("sigma_mm", row.sigma_mm); });
  if (!keep_failed_rows) throw_first_failure(rows);
  return rows;
}

CriticalWidth critical_width_from_rows(std::vector<CriticalRow> rows) {
  std::vector<const CriticalRow*> ok;
  for (const auto& r : rows)
    if (!r.error) ok.push_back(&r);
  if (static_cast<int>(ok.size()) < kPlateauSamples + 1)
    throw NoTransitionError("too few successful rows to locate a critical width");

  double plateau = 0;
  for (int k = 0; k < kPlateauSamples; ++k) plateau += ok[k]->fwhm_mm;
  plateau /= kPlateauSamples;

  const auto [lo, hi] = std::minmax_element(ok.begin(), ok.end(),
                                            [](const auto* a, const auto* b) { return a->fwhm_mm < b->fwhm_mm; });
  if ((*hi)->fwhm_mm - (*lo)->fwhm_mm < kCriticalDeparture * (*lo)->fwhm_mm)
    throw NoTransitionError("FWHM varies by less than 5% across the sigma range");

  CriticalWidth out;
  out.plateau_fwhm_mm = plateau;
  const auto crit = std::find_if(ok.begin(), ok.end(), [&](const auto* r) {
    return r->fwhm_mm > (1 + kCriticalDeparture) * plateau;
  });
  if (crit == ok.end()) throw NoTransitionError("FWHM never rises 5% above the plateau");
  out.sigma_crit_mm = (*crit)->sigma_mm;
  out.rows = std::move(rows);
  return out;
}

CriticalWidth find_critical_width(int l, double sigma_min_mm, double sigma_max_mm, int steps,
                                  const SimulationSetup& setup) {
  return critical_width_from_rows(sweep_critical_rows(l, sigma_min_mm, sigma_max_mm, steps, setup));
}

}  // namespace spdc
