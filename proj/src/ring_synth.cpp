#include "spdc/ring_synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "spdc/errors.hpp"
#include "spdc/parallel.hpp"

namespace spdc {

void validate_detector(const DetectorGeometry& geometry) {
  if (!(geometry.z_mm > 0)) throw GeometryError("detector distance z must be positive");
  if (geometry.nx < 16 || geometry.ny < 16) throw GeometryError("detector must be at least 16x16 pixels");
  if (!(geometry.pitch_mm > 0)) throw GeometryError("detector pitch must be positive");
}

FilterBand FilterBand::top_hat(double center_nm, double half_width_nm, int samples) {
  FilterBand band;
  band.center_nm = center_nm;
  band.half_width_nm = half_width_nm;
  band.samples = samples;
  band.weights.assign(samples > 0 ? samples : 0, samples > 0 ? 1.0 / samples : 0.0);
  return band;
}

std::vector<double> FilterBand::wavelengths_nm() const {
  std::vector<double> out(samples);
  if (samples == 1) {
    out[0] = center_nm;
    return out;
  }
  for (int k = 0; k < samples; ++k) {
    // Mirror indices so samples sit exactly symmetric about the centre.
    const double t = static_cast<double>(2 * k - (samples - 1)) / (samples - 1);
    out[k] = center_nm + half_width_nm * t;
  }
  return out;
}

void validate_band(const FilterBand& band) {
  if (band.samples < 1 || band.samples % 2 == 0) throw DomainError("filter samples must be an odd integer >= 1");
  if (!(band.half_width_nm >= 0)) throw DomainError("filter half width must be non-negative");
  if (!(band.center_nm > band.half_width_nm)) throw DomainError("filter band must lie at positive wavelengths");
  if (static_cast<int>(band.weights.size()) != band.samples)
    throw DomainError("filter weights must match the sample count");
  double sum = 0;
  for (double w : band.weights) {
    if (!(w >= 0)) throw DomainError("filter weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("filter weights must sum to one");
}

std::vector<RingKernel> build_kernels(const UniaxialCrystal<double>& crystal, double theta, Wavelength pump,
                                      const FilterBand& band, const DetectorGeometry& geometry) {
  validate_band(band);
  validate_detector(geometry);
  const auto wavelengths = band.wavelengths_nm();
  std::vector<RingKernel> kernels;
  kernels.reserve(wavelengths.size());
  for (std::size_t k = 0; k < wavelengths.size(); ++k) {
    const auto sol = solve_emission_angles(crystal, theta, pump, Wavelength::from_nm(wavelengths[k]));
    RingKernel kernel;
    kernel.triplet = sol.triplet;
    kernel.signal_radius_mm = geometry.z_mm * std::tan(sol.signal_external);
    kernel.idler_radius_mm = geometry.z_mm * std::tan(sol.idler_external);
    kernel.weight = band.weights[k];
    kernels.push_back(kernel);
  }
  std::stable_sort(kernels.begin(), kernels.end(),
                   [](const RingKernel& a, const RingKernel& b) { return a.triplet.signal < b.triplet.signal; });
  return kernels;
}

namespace {

double raster_weight(double distance, double radius, RingRaster raster) {
  const double off = std::abs(distance - radius);
  if (raster == RingRaster::kBinary) return off <= 0.5 ? 1.0 : 0.0;
  return off < 1.0 ? 1.0 - off : 0.0;
}

int stencil_reach(double radius_px) { return static_cast<int>(std::ceil(radius_px + 1.0)); }

}  // namespace

std::vector<RingPixel> ring_stencil(double radius_px, RingRaster raster) {
  std::vector<RingPixel> pixels;
  const int reach = stencil_reach(radius_px);
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const double w = raster_weight(std::hypot(dx, dy), radius_px, raster);
      if (w > 0) pixels.push_back({dx, dy, w});
    }
  }
  return pixels;
}

RingRasterization render_ring_circle(const Eigen::Vector2d& center_mm, double radius_mm,
                                     const GridGeometry& detector, RingRaster raster) {
  if (!(radius_mm >= 0)) throw DomainError("ring radius must be non-negative");
  const double cx = (center_mm.x() - detector.origin_mm.x()) / detector.pitch_mm;
  const double cy = (center_mm.y() - detector.origin_mm.y()) / detector.pitch_mm;
  const double r = radius_mm / detector.pitch_mm;

  RingRasterization out;
  bool any = false;
  auto emit = [&](int i, int j, double w) {
    any = true;
    if (i < 0 || j < 0 || i >= detector.nx || j >= detector.ny) {
      out.clipped = true;
      return;
    }
    out.pixels.push_back({i, j, w});
  };

  const int reach = stencil_reach(r);
  const int j0 = static_cast<int>(std::floor(cy)) - reach, j1 = static_cast<int>(std::ceil(cy)) + reach;
  const int i0 = static_cast<int>(std::floor(cx)) - reach, i1 = static_cast<int>(std::ceil(cx)) + reach;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const double w = raster_weight(std::hypot(i - cx, j - cy), r, raster);
      if (w > 0) emit(i, j, w);
    }
  }
  if (!any && r < 0.5) emit(static_cast<int>(std::lround(cx)), static_cast<int>(std::lround(cy)), 1.0);
  return out;
}

namespace {

struct Alignment {
  int ox;  // pump column i lands on detector column i + ox
  int oy;
};

Alignment align(const GridGeometry& pump, const GridGeometry& det) {
  if (std::abs(pump.pitch_mm - det.pitch_mm) > 1e-9 * det.pitch_mm) {
    std::ostringstream msg;
    msg << "pump pitch " << pump.pitch_mm << " mm differs from detector pitch " << det.pitch_mm << " mm";
    throw MismatchError(msg.str());
  }
  const double fx = (pump.origin_mm.x() - det.origin_mm.x()) / det.pitch_mm;
  const double fy = (pump.origin_mm.y() - det.origin_mm.y()) / det.pitch_mm;
  const long ox = std::lround(fx), oy = std::lround(fy);
  if (std::abs(fx - ox) > 1e-6 || std::abs(fy - oy) > 1e-6)
    throw MismatchError("pump pixel centres are not on the detector lattice");
  return {static_cast<int>(ox), static_cast<int>(oy)};
}

constexpr double kPumpSupportFraction = 1e-3;

void check_detector_extent(const IntensityGrid& pump, std::span<const RingKernel> kernels,
                           const DetectorGeometry& geometry) {
  const double peak = pump.values.maxCoeff();
  if (!(peak > 0)) return;
  const Eigen::Vector2d c = geometry.center_mm;
  double pump_radius = 0;
  for (int j = 0; j < pump.geometry.ny; ++j)
    for (int i = 0; i < pump.geometry.nx; ++i)
      if (pump.values(j, i) >= kPumpSupportFraction * peak)
        pump_radius = std::max(pump_radius, std::hypot(pump.geometry.x(i) - c.x(), pump.geometry.y(j) - c.y()));
  double ring_radius = 0;
  for (const auto& k : kernels) ring_radius = std::max({ring_radius, k.signal_radius_mm, k.idler_radius_mm});
  const double span = std::min(geometry.nx, geometry.ny) * geometry.pitch_mm;
  if (2 * (ring_radius + pump_radius) > span) {
    std::ostringstream msg;
    msg << "rings exceed the detector: need " << 2 * (ring_radius + pump_radius) << " mm, detector spans " << span
        << " mm";
    throw GeometryError(msg.str());
  }
}

void check_inputs(const IntensityGrid& pump, std::span<const RingKernel> kernels, const DetectorGeometry& geometry) {
  validate_detector(geometry);
  validate_grid(pump);
  for (const auto& k : kernels)
    if (!(k.signal_radius_mm > 0 && k.idler_radius_mm > 0 && k.weight >= 0))
      throw DomainError("ring kernels need positive radii and non-negative weights");
}

struct KernelStencils {
  std::vector<RingPixel> signal;
  std::vector<RingPixel> idler;
  double weight;
};

std::vector<KernelStencils> make_stencils(std::span<const RingKernel> kernels, double pitch, RingRaster raster,
                                          int* reach) {
  std::vector<KernelStencils> out;
  int r = 0;
  for (const auto& k : kernels) {
    out.push_back({ring_stencil(k.signal_radius_mm / pitch, raster), ring_stencil(k.idler_radius_mm / pitch, raster),
                   k.weight});
    r = std::max({r, stencil_reach(k.signal_radius_mm / pitch), stencil_reach(k.idler_radius_mm / pitch)});
  }
  if (reach) *reach = r;
  return out;
}

}  // namespace

ImageArray summed_kernel_image(std::span<const RingKernel> kernels, double pitch_mm, RingRaster raster, int* reach) {
  int r = 0;
  const auto stencils = make_stencils(kernels, pitch_mm, raster, &r);
  ImageArray image = ImageArray::Zero(2 * r + 1, 2 * r + 1);
  for (const auto& s : stencils) {
    for (const auto* ring : {&s.signal, &s.idler})
      for (const auto& p : *ring) image(p.dy + r, p.dx + r) += s.weight * p.weight;
  }
  if (reach) *reach = r;
  return image;
}

SpdcImage synthesize_direct(const IntensityGrid& pump, std::span<const RingKernel> kernels,
                            const DetectorGeometry& geometry, const SynthesisOptions& options) {
  check_inputs(pump, kernels, geometry);
  const GridGeometry det = geometry.grid();
  const Alignment offset = align(pump.geometry, det);
  check_detector_extent(pump, kernels, geometry);

  int reach = 0;
  const auto stencils = make_stencils(kernels, det.pitch_mm, options.raster, &reach);

  // Fixed row chunks with private buffers merged in chunk order: the sum is
  // bit-identical for any worker count.
  const int rows = pump.geometry.ny;
  const int chunks = std::min(rows, 16);
  std::vector<ImageArray> partial(chunks);

  parallel_for(chunks, [&](std::size_t c) {
    ImageArray acc = ImageArray::Zero(det.ny, det.nx);
    const int j_begin = static_cast<int>(c) * rows / chunks;
    const int j_end = (static_cast<int>(c) + 1) * rows / chunks;
    for (int j = j_begin; j < j_end; ++j) {
      const int y0 = j + offset.oy;
      for (int i = 0; i < pump.geometry.nx; ++i) {
        const double intensity = pump.values(j, i);
        if (intensity == 0) continue;
        const int x0 = i + offset.ox;
        const bool inside = x0 - reach >= 0 && y0 - reach >= 0 && x0 + reach < det.nx && y0 + reach < det.ny;
        for (const auto& s : stencils) {
          const double amp = intensity * s.weight;
          for (const auto* ring : {&s.signal, &s.idler}) {
            if (inside) {
              for (const auto& p : *ring) acc(y0 + p.dy, x0 + p.dx) += amp * p.weight;
            } else {
              for (const auto& p : *ring) {
                const int x = x0 + p.dx, y = y0 + p.dy;
                if (x >= 0 && y >= 0 && x < det.nx && y < det.ny) acc(y, x) += amp * p.weight;
              }
            }
          }
        }
      }
    }
    partial[c] = std::move(acc);
  });

  SpdcImage out{geometry, ImageArray::Zero(det.ny, det.nx)};
  for (const auto& p : partial) out.values += p;
  return out;
}

namespace {

int next_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

using ComplexArray = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// In-place 2-D transform: rows, then columns.
void fft2(ComplexArray& a, bool inverse) {
  const auto rows = a.rows(), cols = a.cols();
  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t j) {
    thread_local Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(a.row(j).data(), a.row(j).data() + cols), out;
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    std::copy(out.begin(), out.end(), a.row(j).data());
  });
  parallel_for(static_cast<std::size_t>(cols), [&](std::size_t i) {
    thread_local Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(rows), out;
    for (Eigen::Index j = 0; j < rows; ++j) in[j] = a(j, i);
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (Eigen::Index j = 0; j < rows; ++j) a(j, i) = out[j];
  });
}

}  // namespace

SpdcImage synthesize_convolution(const IntensityGrid& pump, std::span<const RingKernel> kernels,
                                 const DetectorGeometry& geometry, const SynthesisOptions& options) {
  check_inputs(pump, kernels, geometry);
  const GridGeometry det = geometry.grid();
  const Alignment offset = align(pump.geometry, det);
  check_detector_extent(pump, kernels, geometry);

  int reach = 0;
  const ImageArray stencil = summed_kernel_image(kernels, det.pitch_mm, options.raster, &reach);
  const int py = pump.geometry.ny, px = pump.geometry.nx;
  const int full_y = py + 2 * reach, full_x = px + 2 * reach;
  const int ny = next_fft_size(full_y), nx = next_fft_size(full_x);

  ComplexArray a = ComplexArray::Zero(ny, nx);
  ComplexArray b = ComplexArray::Zero(ny, nx);
  a.topLeftCorner(py, px) = pump.values.cast<std::complex<double>>();
  b.topLeftCorner(stencil.rows(), stencil.cols()) = stencil.cast<std::complex<double>>();
  fft2(a, false);
  fft2(b, false);
  a *= b;
  fft2(a, true);

  // Full linear convolution index u relates to detector row Y by
  // u = Y − oy + reach (columns likewise).
  SpdcImage out{geometry, ImageArray::Zero(det.ny, det.nx)};
  for (int y = 0; y < det.ny; ++y) {
    const int u = y - offset.oy + reach;
    if (u < 0 || u >= full_y) continue;
    for (int x = 0; x < det.nx; ++x) {
      const int v = x - offset.ox + reach;
      if (v < 0 || v >= full_x) continue;
      out.values(y, x) = std::max(a(u, v).real(), 0.0);
    }
  }
  return out;
}

}  // namespace spdc
