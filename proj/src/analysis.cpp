#include "spdc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>

#include "spdc/errors.hpp"
#include "spdc/least_squares.hpp"

namespace spdc {

namespace {

Eigen::Vector2d to_pixels(const GridGeometry& g, const Eigen::Vector2d& mm) {
  return (mm - g.origin_mm) / g.pitch_mm;
}

double bilinear(const ImageArray& v, double x, double y) {
  const int nx = static_cast<int>(v.cols()), ny = static_cast<int>(v.rows());
  const int i = std::clamp(static_cast<int>(std::floor(x)), 0, nx - 2);
  const int j = std::clamp(static_cast<int>(std::floor(y)), 0, ny - 2);
  const double fx = x - i, fy = y - j;
  return (1 - fy) * ((1 - fx) * v(j, i) + fx * v(j, i + 1)) + fy * ((1 - fx) * v(j + 1, i) + fx * v(j + 1, i + 1));
}

}  // namespace

RadialProfile radial_profile(const SpdcImage& image, const Eigen::Vector2d& center_mm, const ProfileOptions& options) {
  const GridGeometry g = image.geometry.grid();
  const Eigen::Vector2d c = to_pixels(g, center_mm);
  if (c.x() < 0 || c.y() < 0 || c.x() > g.nx - 1 || c.y() > g.ny - 1)
    throw GeometryError("profile centre lies outside the image");
  const double inscribed = std::min({c.x(), g.nx - 1 - c.x(), c.y(), g.ny - 1 - c.y()});
  const int last_bin = static_cast<int>(std::floor(inscribed));
  const int first_bin = std::max(options.exclusion_px, 0);

  RadialProfile profile;
  profile.bin_width_mm = g.pitch_mm;
  if (last_bin < first_bin) return profile;

  if (options.mode == ProfileMode::kAzimuthal) {
    std::vector<double> sum(last_bin + 1, 0.0);
    std::vector<double> count(last_bin + 1, 0.0);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const double d = std::hypot(i - c.x(), j - c.y());
        const long lo = static_cast<long>(std::floor(d));
        const double t = d - lo;
        if (lo <= last_bin) {
          sum[lo] += (1 - t) * image.values(j, i);
          count[lo] += 1 - t;
        }
        if (lo + 1 <= last_bin) {
          sum[lo + 1] += t * image.values(j, i);
          count[lo + 1] += t;
        }
      }
    }
    for (int k = first_bin; k <= last_bin; ++k) {
      if (count[k] == 0) continue;
      profile.radii_mm.push_back(k * g.pitch_mm);
      profile.intensity.push_back(sum[k] / count[k]);
    }
  } else {
    const double ux = std::cos(options.direction_rad), uy = std::sin(options.direction_rad);
    for (int k = first_bin; k <= last_bin; ++k) {
      const double a = bilinear(image.values, c.x() + k * ux, c.y() + k * uy);
      const double b = bilinear(image.values, c.x() - k * ux, c.y() - k * uy);
      profile.radii_mm.push_back(k * g.pitch_mm);
      profile.intensity.push_back(0.5 * (a + b));
    }
  }
  return profile;
}

RadialProfile radial_profile(const SpdcImage& image, const ProfileOptions& options) {
  return radial_profile(image, image.geometry.center_mm, options);
}

namespace {

std::vector<double> smooth(const std::vector<double>& p) {
  const int n = static_cast<int>(p.size());
  const int half = kSmoothingBins / 2;
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    int c = 0;
    for (int k = std::max(0, i - half); k <= std::min(n - 1, i + half); ++k, ++c) s += p[k];
    q[i] = s / c;
  }
  return q;
}

struct Peaks {
  std::vector<double> smoothed;
  int primary = -1;
  int secondary = -1;  // set when the pair forms a dual ring
};

Peaks find_peaks(const RadialProfile& profile) {
  Peaks out;
  out.smoothed = smooth(profile.intensity);
  const auto& q = out.smoothed;
  const int n = static_cast<int>(q.size());
  if (n == 0) return out;
  const double top = *std::max_element(q.begin(), q.end());
  std::vector<int> maxima;
  for (int i = 1; i + 1 < n; ++i)
    if (q[i] > q[i - 1] && q[i] >= q[i + 1] && q[i] >= kMinPeakFraction * top) maxima.push_back(i);
  if (maxima.empty()) {
    out.primary = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
    return out;
  }
  out.primary = *std::max_element(maxima.begin(), maxima.end(), [&](int a, int b) { return q[a] < q[b]; });
  for (int m : maxima) {
    if (m == out.primary) continue;
    const int lo = std::min(m, out.primary), hi = std::max(m, out.primary);
    const double valley = *std::min_element(q.begin() + lo, q.begin() + hi + 1);
    const double lower = std::min(q[m], q[out.primary]);
    if (valley < kDualValleyRatio * lower && (out.secondary < 0 || q[m] > q[out.secondary])) out.secondary = m;
  }
  return out;
}

}  // namespace

double fwhm(const RadialProfile& profile) {
  const auto& r = profile.radii_mm;
  const auto& p = profile.intensity;
  if (p.empty()) throw DomainError("empty profile");
  const double top = *std::max_element(p.begin(), p.end());
  if (!(top > 0)) throw DomainError("profile has no positive intensity");
  const double half = top / 2;
  const int n = static_cast<int>(p.size());
  int first = 0;
  while (p[first] < half) ++first;
  int last = n - 1;
  while (p[last] < half) --last;
  if (first == 0 || last == n - 1) throw DomainError("profile does not fall below half maximum on both sides");
  const double left = r[first - 1] + (half - p[first - 1]) / (p[first] - p[first - 1]) * (r[first] - r[first - 1]);
  const double right = r[last] + (half - p[last]) / (p[last + 1] - p[last]) * (r[last + 1] - r[last]);
  return right - left;
}

namespace {

struct RingGaussianModel {
  const RadialProfile& profile;

  void operator()(const Eigen::VectorXd& p, Eigen::VectorXd& res, Eigen::MatrixXd* jac) const {
    const double a = p(0), r0 = p(1), w = p(2);
    const auto n = static_cast<Eigen::Index>(profile.radii_mm.size());
    res.resize(n);
    if (jac) jac->resize(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double d = profile.radii_mm[k] - r0;
      const double e = std::exp(-d * d / (w * w));
      res(k) = a * e - profile.intensity[k];
      if (!jac) continue;
      (*jac)(k, 0) = e;
      (*jac)(k, 1) = a * e * 2 * d / (w * w);
      (*jac)(k, 2) = a * e * 2 * d * d / (w * w * w);
    }
  }
};

}  // namespace

GaussianRingFit fit_ring_gaussian(const RadialProfile& profile) {
  if (profile.radii_mm.size() < 4) throw DomainError("profile too short to fit");
  const Peaks peaks = find_peaks(profile);
  if (peaks.secondary >= 0) throw BimodalError("profile has two separated peaks; use detect_dual_rings");

  const auto& p = profile.intensity;
  const int top = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  double width = 3 * profile.bin_width_mm;
  try {
    width = fwhm(profile) / (2 * std::sqrt(std::log(2.0)));
  } catch (const DomainError&) {
  }
  Eigen::VectorXd p0(3);
  p0 << p[top], profile.radii_mm[top], width;

  const auto report = damped_least_squares<double>(RingGaussianModel{profile}, p0);
  const double rms = std::sqrt(report.objective / static_cast<double>(p.size()));
  if (!report.converged) throw ConvergenceError("ring Gaussian fit did not converge", rms);
  return {std::abs(report.params(2)), report.params(1), report.params(0), rms};
}

RingMetrics detect_dual_rings(const RadialProfile& profile) {
  RingMetrics m;
  m.fwhm_mm = fwhm(profile);
  const Peaks peaks = find_peaks(profile);
  const auto& r = profile.radii_mm;
  if (peaks.secondary >= 0) {
    const int inner = std::min(peaks.primary, peaks.secondary);
    const int outer = std::max(peaks.primary, peaks.secondary);
    m.dual_ring = true;
    m.peak_radii_mm = {r[inner], r[outer]};
    m.separation_mm = r[outer] - r[inner];
    return m;
  }
  m.peak_radii_mm = {r[peaks.primary]};
  try {
    m.sigma_ring_mm = fit_ring_gaussian(profile).sigma_ring_mm;
  } catch (const Error&) {
    // Width stays absent when the profile is not Gaussian enough to fit.
  }
  return m;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs at least two points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a(k, 0) = x[k];
    a(k, 1) = 1.0;
    b(k) = y[k];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (a * coef - b).squaredNorm();
  return {coef(0), coef(1), ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0};
}

}  // namespace spdc
