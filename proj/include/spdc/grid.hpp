#pragma once

#include <Eigen/Core>

namespace spdc {

/// Row-major so that row j (constant y) is contiguous, matching image files.
using ImageArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Pixel (i, j) has its centre at origin + (i, j) · pitch, in mm. i runs
/// along x (columns), j along y (rows).
struct GridGeometry {
  int nx = 0;
  int ny = 0;
  double pitch_mm = 1.0;
  Eigen::Vector2d origin_mm = Eigen::Vector2d::Zero();

  double x(int i) const { return origin_mm.x() + i * pitch_mm; }
  double y(int j) const { return origin_mm.y() + j * pitch_mm; }
  Eigen::Vector2d center_mm() const {
    return origin_mm + 0.5 * pitch_mm * Eigen::Vector2d(nx - 1, ny - 1);
  }
  double width_mm() const { return nx * pitch_mm; }
  double height_mm() const { return ny * pitch_mm; }

  bool operator==(const GridGeometry&) const = default;
};

GridGeometry centered_geometry(int nx, int ny, double pitch_mm,
                               const Eigen::Vector2d& center_mm = Eigen::Vector2d::Zero());

struct IntensityGrid {
  GridGeometry geometry;
  ImageArray values;

  IntensityGrid() = default;
  explicit IntensityGrid(const GridGeometry& g) : geometry(g), values(ImageArray::Zero(g.ny, g.nx)) {}
  IntensityGrid(const GridGeometry& g, ImageArray v) : geometry(g), values(std::move(v)) {}

  double total() const { return values.sum(); }
};

/// Throws GeometryError unless nx, ny >= 16, pitch > 0 and values match the
/// declared shape with no negative or non-finite entries.
void validate_grid(const IntensityGrid& grid);

}  // namespace spdc
