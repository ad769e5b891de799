#include "spdc/grid.hpp"

#include "spdc/errors.hpp"

namespace spdc {

GridGeometry centered_geometry(int nx, int ny, double pitch_mm, const Eigen::Vector2d& center_mm) {
  GridGeometry g;
  g.nx = nx;
  g.ny = ny;
  g.pitch_mm = pitch_mm;
  g.origin_mm = center_mm - 0.5 * pitch_mm * Eigen::Vector2d(nx - 1, ny - 1);
  return g;
}

void validate_grid(const IntensityGrid& grid) {
  const auto& g = grid.geometry;
  if (g.nx < 16 || g.ny < 16) throw GeometryError("grid must be at least 16x16 pixels");
  if (!(g.pitch_mm > 0)) throw GeometryError("grid pitch must be positive");
  if (grid.values.rows() != g.ny || grid.values.cols() != g.nx)
    throw GeometryError("grid values do not match the declared shape");
  if (!grid.values.allFinite()) throw GeometryError("grid contains non-finite values");
  if ((grid.values < 0).any()) throw GeometryError("grid contains negative intensity");
}

}  // namespace spdc
