#pragma once

#include <vector>

#include <Eigen/Core>

#include "spdc/grid.hpp"
#include "spdc/optics.hpp"

namespace spdc {

/// Gaussian host beam carrying an optical vortex of charge l (l = 0 is the
/// plain Gaussian). Intensity I0·(r²)^l·exp(−r²/σ²), r in mm.
struct BeamSpec {
  int l = 0;
  double sigma_mm = 1.0;
  double i0 = 1.0;
  Eigen::Vector2d center_mm = Eigen::Vector2d::Zero();

  bool operator==(const BeamSpec&) const = default;
};

void validate_beam(const BeamSpec& spec);

double beam_intensity(const BeamSpec& spec, double x_mm, double y_mm);

/// Analytic maximum of the intensity profile over r.
double beam_peak_intensity(const BeamSpec& spec);

/// Radius of the bright ring, σ√l. Throws DomainError for l = 0.
double peak_radius(const BeamSpec& spec);

/// Square grid centred on the beam spanning 8σ + 2σ√l.
GridGeometry default_beam_geometry(const BeamSpec& spec, int pixels = 512);

/// Samples the beam at pixel centres. Throws GeometryError if the border
/// still carries more than 1e-6 of the peak intensity (beam truncated).
IntensityGrid render_beam(const BeamSpec& spec, const GridGeometry& geometry);

/// Zeroes every pixel whose centre lies outside the aperture rectangle
/// centred on the grid centre.
IntensityGrid clip_to_aperture(const IntensityGrid& grid, const Aperture& aperture);

struct BeamFitOptions {
  int max_iterations = 200;
  bool fit_offset = false;  // adds a constant background term
};

struct BeamFit {
  double sigma_mm = 0;
  double i0 = 0;
  Eigen::Vector2d center_mm = Eigen::Vector2d::Zero();
  double offset = 0;
  double rms_residual = 0;
  int iterations = 0;
  std::vector<double> objective_history;
};

/// Least-squares estimate of (σ, I0, centre) for a fixed vortex order.
/// Throws ConvergenceError when the iteration cap is hit first.
BeamFit fit_beam_profile(const IntensityGrid& grid, int l, const BeamFitOptions& options = {});

}  // namespace spdc
