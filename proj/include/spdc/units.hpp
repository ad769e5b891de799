#pragma once

#include <compare>
#include <numbers>

namespace spdc {

/// Vacuum wavelength. Stored in micrometres, the unit of the Sellmeier fits;
/// constructed and reported in nanometres at API boundaries.
template <typename Scalar>
class BasicWavelength {
 public:
  constexpr BasicWavelength() = default;

  static constexpr BasicWavelength from_nm(Scalar nm) { return BasicWavelength(nm / Scalar(1000)); }
  static constexpr BasicWavelength from_um(Scalar um) { return BasicWavelength(um); }

  constexpr Scalar um() const { return um_; }
  constexpr Scalar nm() const { return um_ * Scalar(1000); }

  constexpr auto operator<=>(const BasicWavelength&) const = default;

 private:
  explicit constexpr BasicWavelength(Scalar um) : um_(um) {}
  Scalar um_{};
};

using Wavelength = BasicWavelength<double>;

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * Scalar(180) / std::numbers::pi_v<Scalar>;
}

}  // namespace spdc
