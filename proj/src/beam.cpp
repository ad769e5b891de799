#include "spdc/beam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/least_squares.hpp"

namespace spdc {

void validate_beam(const BeamSpec& spec) {
  if (spec.l < 0) throw DomainError("vortex order l must be non-negative");
  if (!(spec.sigma_mm > 0)) throw DomainError("beam sigma must be positive");
  if (!(spec.i0 > 0)) throw DomainError("beam I0 must be positive");
}

namespace {

double intensity_at_offset(const BeamSpec& spec, double dx, double dy) {
  const double r2 = dx * dx + dy * dy;
  return spec.i0 * std::pow(r2, spec.l) * std::exp(-r2 / (spec.sigma_mm * spec.sigma_mm));
}

}  // namespace

double beam_intensity(const BeamSpec& spec, double x_mm, double y_mm) {
  return intensity_at_offset(spec, x_mm - spec.center_mm.x(), y_mm - spec.center_mm.y());
}

double beam_peak_intensity(const BeamSpec& spec) {
  // d/d(r²) of (r²)^l e^{−r²/σ²} vanishes at r² = lσ².
  const double r2 = spec.l * spec.sigma_mm * spec.sigma_mm;
  return spec.i0 * std::pow(r2, spec.l) * std::exp(-static_cast<double>(spec.l));
}

double peak_radius(const BeamSpec& spec) {
  validate_beam(spec);
  if (spec.l == 0) throw DomainError("a Gaussian (l = 0) beam peaks at its centre, it has no ring");
  return spec.sigma_mm * std::sqrt(static_cast<double>(spec.l));
}

GridGeometry default_beam_geometry(const BeamSpec& spec, int pixels) {
  validate_beam(spec);
  const double span = 8 * spec.sigma_mm + 2 * spec.sigma_mm * std::sqrt(static_cast<double>(spec.l));
  return centered_geometry(pixels, pixels, span / pixels, spec.center_mm);
}

IntensityGrid render_beam(const BeamSpec& spec, const GridGeometry& geometry) {
  validate_beam(spec);
  IntensityGrid grid(geometry);
  // Offsets from the grid centre are exact negatives for mirrored pixels, so a
  // centred beam renders exactly point symmetric.
  const Eigen::Vector2d shift = geometry.center_mm() - spec.center_mm;
  const double pitch = geometry.pitch_mm;
  for (int j = 0; j < geometry.ny; ++j) {
    const double dy = (j - 0.5 * (geometry.ny - 1)) * pitch + shift.y();
    for (int i = 0; i < geometry.nx; ++i)
      grid.values(j, i) = intensity_at_offset(spec, (i - 0.5 * (geometry.nx - 1)) * pitch + shift.x(), dy);
  }
  validate_grid(grid);

  const auto& v = grid.values;
  const double border = std::max({v.row(0).maxCoeff(), v.row(v.rows() - 1).maxCoeff(), v.col(0).maxCoeff(),
                                  v.col(v.cols() - 1).maxCoeff()});
  if (border > 1e-6 * beam_peak_intensity(spec)) {
    std::ostringstream msg;
    msg << "grid too small for beam (l=" << spec.l << ", sigma=" << spec.sigma_mm
        << " mm): border intensity " << border / beam_peak_intensity(spec) << " of peak";
    throw GeometryError(msg.str());
  }
  return grid;
}

IntensityGrid clip_to_aperture(const IntensityGrid& grid, const Aperture& aperture) {
  IntensityGrid out = grid;
  const Eigen::Vector2d c = grid.geometry.center_mm();
  const double hx = aperture.width_mm / 2;
  const double hy = aperture.height_mm / 2;
  for (int j = 0; j < grid.geometry.ny; ++j) {
    const bool row_inside = std::abs(grid.geometry.y(j) - c.y()) <= hy;
    for (int i = 0; i < grid.geometry.nx; ++i) {
      if (!row_inside || std::abs(grid.geometry.x(i) - c.x()) > hx) out.values(j, i) = 0;
    }
  }
  return out;
}

namespace {

// Parameter vector: σ, I0, x0, y0 [, offset].
struct VortexModel {
  const IntensityGrid& grid;
  int l;
  bool with_offset;

  void operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const auto& g = grid.geometry;
    const double sigma = p(0), i0 = p(1), x0 = p(2), y0 = p(3);
    const double offset = with_offset ? p(4) : 0.0;
    const double inv_s2 = 1.0 / (sigma * sigma);
    r.resize(static_cast<Eigen::Index>(g.nx) * g.ny);
    if (jac) jac->resize(r.size(), p.size());

    Eigen::Index k = 0;
    for (int j = 0; j < g.ny; ++j) {
      const double dy = g.y(j) - y0;
      for (int i = 0; i < g.nx; ++i, ++k) {
        const double dx = g.x(i) - x0;
        const double r2 = dx * dx + dy * dy;
        const double gauss = std::exp(-r2 * inv_s2);
        const double shape = std::pow(r2, l) * gauss;
        r(k) = i0 * shape + offset - grid.values(j, i);
        if (!jac) continue;
        // d(shape)/d(r²)
        const double d_r2 = (l > 0 ? l * std::pow(r2, l - 1) * gauss : 0.0) - shape * inv_s2;
        (*jac)(k, 0) = i0 * shape * 2.0 * r2 * inv_s2 / sigma;
        (*jac)(k, 1) = shape;
        (*jac)(k, 2) = i0 * d_r2 * (-2.0 * dx);
        (*jac)(k, 3) = i0 * d_r2 * (-2.0 * dy);
        if (with_offset) (*jac)(k, 4) = 1.0;
      }
    }
  }
};

double median_border(const ImageArray& v) {
  std::vector<double> border;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    border.push_back(v(0, i));
    border.push_back(v(v.rows() - 1, i));
  }
  for (Eigen::Index j = 1; j + 1 < v.rows(); ++j) {
    border.push_back(v(j, 0));
    border.push_back(v(j, v.cols() - 1));
  }
  auto mid = border.begin() + static_cast<std::ptrdiff_t>(border.size() / 2);
  std::nth_element(border.begin(), mid, border.end());
  return *mid;
}

}  // namespace

BeamFit fit_beam_profile(const IntensityGrid& grid, int l, const BeamFitOptions& options) {
  if (l < 0) throw DomainError("vortex order l must be non-negative");
  const auto& g = grid.geometry;
  const auto& v = grid.values;
  const double peak = v.maxCoeff();
  if (!(peak > 0)) throw DomainError("image has no positive intensity");
  if (!(peak > 10 * median_border(v))) throw DomainError("peak is less than 10x the median border value");

  // Moments over pixels above 2% of the peak keep flat noise out of the start guess.
  const double floor = 0.02 * peak;
  double w_sum = 0, wx = 0, wy = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double w = std::max(v(j, i) - floor, 0.0);
      w_sum += w;
      wx += w * g.x(i);
      wy += w * g.y(j);
    }
  const double cx = wx / w_sum, cy = wy / w_sum;
  double wr2 = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double w = std::max(v(j, i) - floor, 0.0);
      const double dx = g.x(i) - cx, dy = g.y(j) - cy;
      wr2 += w * (dx * dx + dy * dy);
    }
  // Second moment of the vortex intensity is σ²(l + 1).
  const double sigma0 = std::sqrt(wr2 / w_sum / (l + 1));
  const double i0_guess = l == 0 ? peak : peak / std::pow(l * sigma0 * sigma0 / std::exp(1.0), l);

  Eigen::VectorXd p0(options.fit_offset ? 5 : 4);
  p0 << sigma0, i0_guess, cx, cy;
  if (options.fit_offset) p0(4) = 0.0;

  LeastSquaresOptions lsq;
  lsq.max_iterations = options.max_iterations;
  const VortexModel model{grid, l, options.fit_offset};
  const auto report = damped_least_squares<double>(model, p0, lsq);

  const double rms = std::sqrt(report.objective / static_cast<double>(v.size()));
  if (!report.converged) {
    std::ostringstream msg;
    msg << "beam fit did not converge in " << options.max_iterations << " iterations (rms residual " << rms << ")";
    throw ConvergenceError(msg.str(), rms);
  }

  BeamFit fit;
  fit.sigma_mm = std::abs(report.params(0));
  fit.i0 = report.params(1);
  fit.center_mm = report.params.segment<2>(2);
  fit.offset = options.fit_offset ? report.params(4) : 0.0;
  fit.rms_residual = rms;
  fit.iterations = report.iterations;
  fit.objective_history = report.history;
  return fit;
}

}  // namespace spdc
