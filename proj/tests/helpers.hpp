#pragma once

#include <cmath>

#include "pairsim/constants.hpp"
#include "pairsim/ramps.hpp"

namespace testutil {

inline constexpr double kUHigh = 700.0;

/// Calibration anchored so the rocking mode spans 2pi*2.5 MHz at U = 700 V
/// down to 2pi*0.5 MHz at the matching low voltage.
inline pairsim::ramps::TrapCalibration default_cal() {
  using namespace pairsim;
  ramps::TrapCalibration cal;
  cal.omega_lf = kTwoPi * 1.2e6;
  cal.omega_dc = kTwoPi * 1.0e6;
  const double wa_high = kTwoPi * 2.5e6;
  const double wmf_high =
      std::sqrt(wa_high * wa_high + cal.omega_lf * cal.omega_lf);
  cal.kappa_rf =
      std::sqrt(wmf_high * wmf_high + cal.omega_dc * cal.omega_dc) / kUHigh;
  return cal;
}

inline double default_u_low(const pairsim::ramps::TrapCalibration& cal) {
  return pairsim::ramps::u_of_rocking(pairsim::kTwoPi * 0.5e6, cal);
}

/// The experiment's frequency pulse: 1 us smooth ramps 2.5 -> 0.5 -> 2.5 MHz,
/// held at the bottom long enough that the two ramps' squeezing adds up.
inline pairsim::ramps::PulseSpec fig2_pulse(
    const pairsim::ramps::TrapCalibration& cal) {
  pairsim::ramps::PulseSpec spec;
  spec.t_ramp = 1.0e-6;
  spec.t_hold = 0.94e-6;
  spec.u_high = kUHigh;
  spec.u_low = default_u_low(cal);
  spec.smooth_order = 2;
  return spec;
}

inline double default_grid(const pairsim::ramps::TrapCalibration&) {
  return pairsim::ramps::default_grid_dt(pairsim::kTwoPi * 2.5e6);
}

}  // namespace testutil
