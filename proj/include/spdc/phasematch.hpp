#pragma once

#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/optics.hpp"
#include "spdc/roots.hpp"
#include "spdc/units.hpp"

namespace spdc {

// Type-I (e -> o + o) non-collinear phase matching for a pump at normal
// incidence. Walk-off of the extraordinary pump is neglected, so emission
// cones are azimuthally symmetric about the pump wave-vector.

template <typename Scalar>
struct BasicPhotonTriplet {
  BasicWavelength<Scalar> pump;
  BasicWavelength<Scalar> signal;
  BasicWavelength<Scalar> idler;

  bool operator==(const BasicPhotonTriplet&) const = default;
};

template <typename Scalar>
struct BasicEmissionSolution {
  BasicPhotonTriplet<Scalar> triplet;
  Scalar signal_internal{};  // radians, inside the crystal
  Scalar idler_internal{};
  Scalar signal_external{};  // radians, after the exit face
  Scalar idler_external{};
  Scalar residual{};  // |longitudinal mismatch| / pump wave-number
};

using PhotonTriplet = BasicPhotonTriplet<double>;
using EmissionSolution = BasicEmissionSolution<double>;

/// Internal half-angle bracket searched by the solver, radians.
template <typename Scalar>
inline constexpr Scalar kEmissionBracket = Scalar(0.35);

/// Energy conservation 1/λp = 1/λs + 1/λi solved for the idler.
template <typename Scalar>
BasicWavelength<Scalar> idler_wavelength(BasicWavelength<Scalar> pump, BasicWavelength<Scalar> signal) {
  if (!(pump.nm() > 0) || !(signal.nm() > pump.nm()))
    throw DomainError("signal wavelength must exceed the pump wavelength");
  const Scalar lp = pump.nm();
  const Scalar ls = signal.nm();
  return BasicWavelength<Scalar>::from_nm(lp * ls / (ls - lp));
}

template <typename Scalar>
BasicPhotonTriplet<Scalar> make_triplet(BasicWavelength<Scalar> pump, BasicWavelength<Scalar> signal) {
  return {pump, signal, idler_wavelength(pump, signal)};
}

namespace detail {

// Wave numbers divided by 2π, per nm.
template <typename Scalar>
struct WaveNumbers {
  Scalar pump;
  Scalar signal;
  Scalar idler;
};

template <typename Scalar>
WaveNumbers<Scalar> wave_numbers(const UniaxialCrystal<Scalar>& crystal, Scalar theta,
                                 const BasicPhotonTriplet<Scalar>& t) {
  return {n_extraordinary_at_angle(crystal, t.pump, theta) / t.pump.nm(),
          ordinary_index(crystal, t.signal) / t.signal.nm(),
          ordinary_index(crystal, t.idler) / t.idler.nm()};
}

// Transverse balance k_s sin φs = k_i sin φi, solved for φi.
template <typename Scalar>
Scalar idler_angle(const WaveNumbers<Scalar>& k, Scalar signal_angle) {
  const Scalar s = k.signal / k.idler * std::sin(signal_angle);
  if (std::abs(s) > Scalar(1)) throw DomainError("transverse balance requires |sin(phi_i)| > 1");
  return std::asin(s);
}

template <typename Scalar>
Scalar longitudinal(const WaveNumbers<Scalar>& k, Scalar signal_angle) {
  return k.pump - k.signal * std::cos(signal_angle) - k.idler * std::cos(idler_angle(k, signal_angle));
}

}  // namespace detail

/// Longitudinal momentum mismatch (per nm, wave numbers over 2π) with the idler
/// angle eliminated through transverse balance. Increasing in `signal_angle`.
template <typename Scalar>
Scalar longitudinal_residual(const UniaxialCrystal<Scalar>& crystal, Scalar theta,
                             const BasicPhotonTriplet<Scalar>& triplet, Scalar signal_angle) {
  return detail::longitudinal(detail::wave_numbers(crystal, theta, triplet), signal_angle);
}

/// Refraction through a flat exit face normal to the pump into vacuum.
template <typename Scalar>
Scalar external_angle(Scalar internal_angle, Scalar index) {
  const Scalar s = index * std::sin(internal_angle);
  if (s > Scalar(1)) throw TotalInternalReflectionError("emission angle is totally internally reflected");
  return std::asin(s);
}

template <typename Scalar>
BasicEmissionSolution<Scalar> solve_emission_angles(const UniaxialCrystal<Scalar>& crystal, Scalar theta,
                                                    BasicWavelength<Scalar> pump,
                                                    BasicWavelength<Scalar> signal) {
  const auto triplet = make_triplet(pump, signal);
  const auto k = detail::wave_numbers(crystal, theta, triplet);
  auto residual = [&k](Scalar phi) { return detail::longitudinal(k, phi); };

  RootResult<Scalar> root;
  try {
    root = find_root_bracketed(residual, Scalar(0), kEmissionBracket<Scalar>, Scalar(1e-12));
  } catch (const NoSolutionError& e) {
    std::ostringstream msg;
    msg << "no phase matching for signal " << signal.nm() << " nm (theta=" << rad_to_deg(theta)
        << " deg): " << e.what();
    throw NoSolutionError(msg.str());
  }

  BasicEmissionSolution<Scalar> sol;
  sol.triplet = triplet;
  sol.signal_internal = root.x;
  sol.idler_internal = detail::idler_angle(k, root.x);
  sol.signal_external = external_angle(sol.signal_internal, ordinary_index(crystal, triplet.signal));
  sol.idler_external = external_angle(sol.idler_internal, ordinary_index(crystal, triplet.idler));
  sol.residual = std::abs(root.fx) / k.pump;
  return sol;
}

/// Optic-axis angle Θ ∈ [20°, 45°] at which the degenerate (λs = 2λp)
/// external half-angle equals `target_external`. Zero target returns the
/// collinear boundary.
template <typename Scalar>
Scalar find_phasematch_theta(const UniaxialCrystal<Scalar>& crystal, BasicWavelength<Scalar> pump,
                             Scalar target_external) {
  const auto signal = BasicWavelength<Scalar>::from_nm(2 * pump.nm());
  const auto triplet = make_triplet(pump, signal);
  const Scalar n_signal = ordinary_index(crystal, signal);
  if (!(target_external >= 0) || std::sin(target_external) / n_signal > std::sin(kEmissionBracket<Scalar>))
    throw NoSolutionError("target external angle outside the solver bracket");
  const Scalar internal = std::asin(std::sin(target_external) / n_signal);

  // Residual at fixed φs decreases with Θ because n_e(λp, Θ) does.
  auto residual = [&](Scalar theta) { return longitudinal_residual(crystal, theta, triplet, internal); };
  try {
    return find_root_bracketed(residual, deg_to_rad(Scalar(20)), deg_to_rad(Scalar(45)), Scalar(1e-13)).x;
  } catch (const NoSolutionError&) {
    throw NoSolutionError("target external angle not reachable for theta in [20, 45] deg");
  }
}

}  // namespace spdc
