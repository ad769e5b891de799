#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spdc/beam.hpp"
#include "spdc/ring_synth.hpp"

namespace spdc {

struct RadialProfile {
  std::vector<double> radii_mm;  // bin centres, strictly increasing
  std::vector<double> intensity;
  double bin_width_mm = 0;
};

enum class ProfileMode { kAzimuthal, kLineCut };

struct ProfileOptions {
  ProfileMode mode = ProfileMode::kAzimuthal;
  /// Bins closer to the centre than this are dropped (pump spot region).
  int exclusion_px = 10;
  /// Line-cut direction measured from +x.
  double direction_rad = 0.0;

  bool operator==(const ProfileOptions&) const = default;
};

/// Radial profile about `center_mm` with one-pixel bins up to the largest
/// circle inscribed in the image. Azimuthal mode averages pixels into the two
/// nearest bins with linear weights; line-cut mode folds the two half-lines along
/// the direction, sampled bilinearly. Throws GeometryError if the centre is
/// off the image.
RadialProfile radial_profile(const SpdcImage& image, const Eigen::Vector2d& center_mm,
                             const ProfileOptions& options = {});

/// Profile centred on the detector centre.
RadialProfile radial_profile(const SpdcImage& image, const ProfileOptions& options = {});

struct GaussianRingFit {
  double sigma_ring_mm = 0;  // width in the exp(−(r − R0)²/σ²) convention
  double peak_radius_mm = 0;
  double amplitude = 0;
  double rms_residual = 0;
};

/// Least-squares fit of A·exp(−(r − R0)²/σ²). FWHM = 2√(ln 2)·σ in this
/// convention; the standard deviation is σ/√2. Throws BimodalError if the
/// profile has two separated peaks, ConvergenceError past the iteration cap.
GaussianRingFit fit_ring_gaussian(const RadialProfile& profile);

/// Outermost minus innermost half-maximum crossing (linear interpolation),
/// so a split ring is measured across its whole envelope.
double fwhm(const RadialProfile& profile);

struct RingMetrics {
  std::optional<double> sigma_ring_mm;  // only for single rings
  double fwhm_mm = 0;
  std::vector<double> peak_radii_mm;
  bool dual_ring = false;
  double separation_mm = 0;
};

/// Profile maxima below this fraction of the global maximum are ignored.
inline constexpr double kMinPeakFraction = 0.1;
/// Two maxima form a dual ring when the valley between them is below this
/// fraction of the lower maximum.
inline constexpr double kDualValleyRatio = 0.85;
inline constexpr int kSmoothingBins = 3;

RingMetrics detect_dual_rings(const RadialProfile& profile);

// ---------------------------------------------------------------------------
// End-to-end pipeline: render pump -> (clip) -> kernels -> synthesize.

enum class SynthesisPath { kConvolution, kDirect };

struct SimulationSetup {
  UniaxialCrystal<double> crystal = bbo();
  Wavelength pump = Wavelength::from_nm(405.0);
  FilterBand band;
  DetectorGeometry detector;
  SynthesisPath path = SynthesisPath::kConvolution;
  SynthesisOptions synthesis;
  ProfileOptions profile;
  bool clip_to_crystal = false;
};

std::vector<RingKernel> build_kernels(const SimulationSetup& setup);

/// Pump rendered on the detector lattice, clipped to the crystal face when
/// requested.
IntensityGrid render_pump(const BeamSpec& beam, const SimulationSetup& setup);

SpdcImage simulate_ring(const BeamSpec& beam, const SimulationSetup& setup, std::span<const RingKernel> kernels);
SpdcImage simulate_ring(const BeamSpec& beam, const SimulationSetup& setup);

// ---------------------------------------------------------------------------
// Parameter sweeps. Rows are computed independently (possibly in parallel)
// and returned in input order. A failed row carries its error message; the
// sweep functions throw the first failure, tagged with its parameter, unless
// `keep_failed_rows` is set.

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

/// Ordinary least-squares line through (x, y); needs at least two points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct WidthRow {
  double sigma_pump_mm = 0;
  double sigma_ring_mm = 0;
  std::optional<std::string> error;
};

struct WidthSweep {
  std::vector<WidthRow> rows;
  std::optional<LineFit> line;  // present with two or more successful rows
};

/// Gaussian pump ring width versus pump width.
WidthSweep sweep_pump_width(const std::vector<double>& sigmas_mm, const SimulationSetup& setup,
                            bool keep_failed_rows = false);

struct OrderRow {
  int l = 0;
  double fwhm_mm = 0;
  double separation_mm = 0;
  bool dual_ring = false;
  std::optional<std::string> error;
};

/// Ring FWHM and dual-ring separation versus vortex order; rows sorted by l.
std::vector<OrderRow> sweep_vortex_order(std::vector<int> orders, double sigma_mm, const SimulationSetup& setup,
                                         bool keep_failed_rows = false);

struct CriticalRow {
  double sigma_mm = 0;
  double fwhm_mm = 0;
  std::optional<std::string> error;
};

struct CriticalWidth {
  double sigma_crit_mm = 0;
  double plateau_fwhm_mm = 0;
  std::vector<CriticalRow> rows;
};

/// Relative FWHM rise over the plateau that marks the critical width.
inline constexpr double kCriticalDeparture = 0.05;
inline constexpr int kPlateauSamples = 3;

/// FWHM rows over `steps` evenly spaced σ in [sigma_min, sigma_max].
std::vector<CriticalRow> sweep_critical_rows(int l, double sigma_min_mm, double sigma_max_mm, int steps,
                                             const SimulationSetup& setup, bool keep_failed_rows = false);

/// Smallest σ whose FWHM exceeds the plateau (mean of the lowest three σ) by
/// more than 5%. Throws NoTransitionError if FWHM varies by less than 5%
/// across the whole range.
CriticalWidth critical_width_from_rows(std::vector<CriticalRow> rows);

CriticalWidth find_critical_width(int l, double sigma_min_mm, double sigma_max_mm, int steps,
                                  const SimulationSetup& setup);

}  // namespace spdc
