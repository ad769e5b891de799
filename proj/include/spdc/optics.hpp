#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

/// n(λ) = sqrt(a + b / (λ² − c) − d·λ²), λ in µm.
template <typename Scalar>
struct SellmeierCoefficients {
  Scalar a{};
  Scalar b{};  // µm²
  Scalar c{};  // µm²
  Scalar d{};  // µm⁻²

  bool operator==(const SellmeierCoefficients&) const = default;
};

template <typename Scalar>
struct WavelengthDomain {
  Scalar min_um = Scalar(0.2);
  Scalar max_um = Scalar(1.5);

  bool contains(BasicWavelength<Scalar> wl) const { return wl.um() >= min_um && wl.um() <= max_um; }
  bool operator==(const WavelengthDomain&) const = default;
};

struct Aperture {
  double width_mm = 6.0;
  double height_mm = 6.0;

  bool operator==(const Aperture&) const = default;
};

template <typename Scalar>
struct UniaxialCrystal {
  SellmeierCoefficients<Scalar> ordinary;
  SellmeierCoefficients<Scalar> extraordinary;
  Scalar optic_axis_angle{};  // radians, between optic axis and pump wave-vector
  Aperture aperture;
  WavelengthDomain<Scalar> domain;

  bool operator==(const UniaxialCrystal&) const = default;
};

/// Beta-barium borate with the optic axis cut at 29.7°, 6×6 mm face.
template <typename Scalar = double>
UniaxialCrystal<Scalar> bbo() {
  UniaxialCrystal<Scalar> crystal;
  crystal.ordinary = {Scalar(2.7359), Scalar(0.01878), Scalar(0.01822), Scalar(0.01354)};
  crystal.extraordinary = {Scalar(2.3753), Scalar(0.01224), Scalar(0.01667), Scalar(0.01516)};
  crystal.optic_axis_angle = deg_to_rad(Scalar(29.7));
  crystal.aperture = {6.0, 6.0};
  return crystal;
}

template <typename Scalar>
Scalar sellmeier_index(const SellmeierCoefficients<Scalar>& coeffs, BasicWavelength<Scalar> wl,
                       const WavelengthDomain<Scalar>& domain = {}) {
  if (!domain.contains(wl)) {
    std::ostringstream msg;
    msg << "wavelength " << wl.nm() << " nm outside supported domain [" << domain.min_um << ", "
        << domain.max_um << "] um";
    throw DomainError(msg.str());
  }
  const Scalar l2 = wl.um() * wl.um();
  const Scalar denom = l2 - coeffs.c;
  if (denom == Scalar(0)) throw DomainError("wavelength sits on the Sellmeier pole");
  const Scalar radicand = coeffs.a + coeffs.b / denom - coeffs.d * l2;
  if (!(radicand > Scalar(0))) throw DomainError("Sellmeier radicand is not positive");
  return std::sqrt(radicand);
}

template <typename Scalar>
Scalar ordinary_index(const UniaxialCrystal<Scalar>& crystal, BasicWavelength<Scalar> wl) {
  return sellmeier_index(crystal.ordinary, wl, crystal.domain);
}

template <typename Scalar>
Scalar extraordinary_index(const UniaxialCrystal<Scalar>& crystal, BasicWavelength<Scalar> wl) {
  return sellmeier_index(crystal.extraordinary, wl, crystal.domain);
}

/// Index seen by the extraordinary wave travelling at `theta` from the optic axis.
template <typename Scalar>
Scalar n_extraordinary_at_angle(const UniaxialCrystal<Scalar>& crystal, BasicWavelength<Scalar> wl,
                                Scalar theta) {
  if (!(theta >= Scalar(0) && theta < std::numbers::pi_v<Scalar> / 2))
    throw DomainError("optic-axis angle must lie in [0, pi/2)");
  const Scalar n_o = ordinary_index(crystal, wl);
  const Scalar n_e = extraordinary_index(crystal, wl);
  const Scalar t = std::tan(theta);
  const Scalar ratio_t = n_o / n_e * t;
  return n_o * std::sqrt((Scalar(1) + t * t) / (Scalar(1) + ratio_t * ratio_t));
}

/// Checks the crystal invariants: sane Θ, no pole inside the domain, physical
/// indices, and n_e < n_o (negative uniaxial) sampled across the domain.
/// Throws DomainError naming the violated condition.
template <typename Scalar>
void validate_crystal(const UniaxialCrystal<Scalar>& crystal) {
  if (!(crystal.optic_axis_angle > Scalar(0) && crystal.optic_axis_angle < std::numbers::pi_v<Scalar> / 2))
    throw DomainError("optic-axis angle must lie in (0, pi/2)");
  if (!(crystal.aperture.width_mm > 0 && crystal.aperture.height_mm > 0))
    throw DomainError("aperture must be positive");
  if (!(crystal.domain.min_um > 0 && crystal.domain.min_um < crystal.domain.max_um))
    throw DomainError("wavelength domain is empty");
  const auto min2 = crystal.domain.min_um * crystal.domain.min_um;
  for (const auto* coeffs : {&crystal.ordinary, &crystal.extraordinary}) {
    if (!(min2 > coeffs->c)) throw DomainError("Sellmeier pole lies inside the wavelength domain");
  }
  constexpr int kSamples = 64;
  for (int i = 0; i <= kSamples; ++i) {
    const Scalar um = crystal.domain.min_um + (crystal.domain.max_um - crystal.domain.min_um) * i / kSamples;
    const auto wl = BasicWavelength<Scalar>::from_um(um);
    const Scalar n_o = ordinary_index(crystal, wl);
    const Scalar n_e = extraordinary_index(crystal, wl);
    if (!(n_o > Scalar(1) && n_e > Scalar(1))) throw DomainError("refractive index <= 1 inside the domain");
    if (!(n_e < n_o)) throw DomainError("crystal is not negative uniaxial (n_e >= n_o)");
  }
}

}  // namespace spdc
