#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "spdc/grid.hpp"
#include "spdc/optics.hpp"
#include "spdc/phasematch.hpp"

namespace spdc {

/// Detector plane at an effective free-space distance z behind the crystal.
struct DetectorGeometry {
  double z_mm = 100.0;
  int nx = 512;
  int ny = 512;
  double pitch_mm = 0.05;
  Eigen::Vector2d center_mm = Eigen::Vector2d::Zero();

  GridGeometry grid() const { return centered_geometry(nx, ny, pitch_mm, center_mm); }
  bool operator==(const DetectorGeometry&) const = default;
};

void validate_detector(const DetectorGeometry& geometry);

/// Interference-filter pass band sampled at `samples` signal wavelengths
/// symmetric about the centre. Weights sum to one.
struct FilterBand {
  double center_nm = 810.0;
  double half_width_nm = 5.0;
  int samples = 11;
  std::vector<double> weights = std::vector<double>(11, 1.0 / 11);

  /// Uniform weights over the band.
  static FilterBand top_hat(double center_nm, double half_width_nm, int samples);

  std::vector<double> wavelengths_nm() const;
  bool operator==(const FilterBand&) const = default;
};

void validate_band(const FilterBand& band);

/// The signal and idler circles contributed by one pump point at one sampled
/// signal wavelength.
struct RingKernel {
  PhotonTriplet triplet;
  double signal_radius_mm = 0;
  double idler_radius_mm = 0;
  double weight = 0;
};

/// One sorted kernel per band sample; R = z·tan(φ_ext). Throws
/// NoSolutionError naming the first wavelength without phase matching.
std::vector<RingKernel> build_kernels(const UniaxialCrystal<double>& crystal, double theta, Wavelength pump,
                                      const FilterBand& band, const DetectorGeometry& geometry);

enum class RingRaster {
  kBinary,       // pixels whose centre is within half a pixel of the circle
  kAntialiased,  // tent weight 1 − |d − R| (pixel units) for |d − R| < 1
};

struct RingPixel {
  int dx;
  int dy;
  double weight;
};

/// Circle of `radius_px` rasterised around an integer pixel centre. Offsets
/// are sorted (dy, dx); a radius under half a pixel yields the centre alone.
std::vector<RingPixel> ring_stencil(double radius_px, RingRaster raster = RingRaster::kBinary);

struct RingRasterization {
  std::vector<RingPixel> pixels;  // absolute (i, j) detector indices in dx/dy
  bool clipped = false;           // part of the circle fell outside the detector
};

/// One-pixel-wide circle on the detector grid around an arbitrary centre.
RingRasterization render_ring_circle(const Eigen::Vector2d& center_mm, double radius_mm,
                                     const GridGeometry& detector, RingRaster raster = RingRaster::kBinary);

struct SpdcImage {
  DetectorGeometry geometry;
  ImageArray values;
};

struct SynthesisOptions {
  RingRaster raster = RingRaster::kBinary;
};

/// Per-point ring accumulation: every pump pixel deposits its intensity,
/// scaled by each kernel weight, on that kernel's signal and idler circles
/// centred at the pixel. Contributions falling off the detector are dropped.
///
/// The pump grid must share the detector pitch with pixel centres on the
/// detector lattice (MismatchError otherwise). Throws GeometryError when the
/// detector is narrower than 2·(largest ring radius + pump radius), the pump
/// radius being the farthest pixel holding at least 1e-3 of the pump maximum.
SpdcImage synthesize_direct(const IntensityGrid& pump, std::span<const RingKernel> kernels,
                            const DetectorGeometry& geometry, const SynthesisOptions& options = {});

/// Same image as synthesize_direct, computed as the FFT convolution of the
/// pump with the summed ring stencil.
SpdcImage synthesize_convolution(const IntensityGrid& pump, std::span<const RingKernel> kernels,
                                 const DetectorGeometry& geometry, const SynthesisOptions& options = {});

/// Weighted sum of every kernel's signal and idler stencils on a square
/// (2·reach + 1)² patch; `reach` is returned through the out-parameter.
ImageArray summed_kernel_image(std::span<const RingKernel> kernels, double pitch_mm, RingRaster raster,
                               int* reach = nullptr);

}  // namespace spdc
