#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pairsim::ramps {

/// Pseudopotential-vs-static-defocus model for the trap modes.
///
/// The mean-field radial frequency follows omega_mf(U)^2 = (kappa_rf U)^2 -
/// omega_dc^2; the rocking mode of the two-ion crystal sits at omega_a^2 =
/// omega_mf^2 - omega_lf^2, where omega_lf is the low-frequency partner mode,
/// independent of the rf amplitude U.
struct TrapCalibration {
  double kappa_rf = 0.0;  ///< rad/s per volt of rf amplitude
  double omega_dc = 0.0;  ///< rad/s, static defocusing
  double omega_lf = 0.0;  ///< rad/s, U-independent partner mode

  /// Throws ConfigError unless the rocking mode is real and positive over
  /// the closed voltage interval [u_min, u_max].
  void validate(double u_min, double u_max) const;
};

/// One experimental frequency pulse: ramp down, hold, ramp up.
struct PulseSpec {
  double t_ramp = 1.0e-6;         ///< s, duration of each ramp
  double t_hold = 0.0;            ///< s, flat segment at u_low
  double u_high = 0.0;            ///< V
  double u_low = 0.0;             ///< V
  int smooth_order = 2;           ///< C^k smooth-step order (1..4)
  double t_delay = 0.0;           ///< s, electronics delay
  double filter_bandwidth = 0.0;  ///< Hz first-order low-pass; 0 = ideal

  void validate() const;
};

enum class SegmentKind { Ramp, Hold, Free };

std::string to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(const std::string& name);

struct Segment {
  SegmentKind kind = SegmentKind::Hold;
  double t_begin = 0.0;
  double t_end = 0.0;
};

/// Piecewise-linear omega(t) on a strictly increasing time grid, with
/// segment annotations. Profiles built by this module use uniform grids.
class FrequencyProfile {
 public:
  FrequencyProfile() = default;
  FrequencyProfile(std::vector<double> times, std::vector<double> omega,
                   std::vector<Segment> segments);

  /// Linear interpolation; clamps to the end values outside the grid.
  double omega_at(double t) const;

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  double duration() const { return times_.back() - times_.front(); }
  std::size_t size() const { return times_.size(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& omega() const { return omega_; }
  const std::vector<Segment>& segments() const { return segments_; }

  double omega_min() const;
  double omega_max() const;

  /// Segment label at time t (first matching segment).
  SegmentKind segment_at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<double> omega_;
  std::vector<Segment> segments_;
};

/// Interpolation cursor for fast repeated omega_at() lookups with
/// mostly-monotone query times. Does not outlive its profile.
class ProfileCursor {
 public:
  explicit ProfileCursor(const FrequencyProfile& profile)
      : profile_(&profile) {}
  double omega_at(double t);

 private:
  const FrequencyProfile* profile_;
  std::size_t hint_ = 0;
};

/// C^k polynomial smooth-step on [0,1]: order = k, so k = 1 is the cubic
/// 3s^2-2s^3, k = 2 the quintic 10s^3-15s^4+6s^5, ... The first k
/// derivatives vanish at both endpoints. Throws ConfigError outside [0,1]
/// or for unsupported order.
double smoothstep(double s, int order);

/// Mean-field mode frequency at rf amplitude u:
/// sqrt((kappa_rf u)^2 - omega_dc^2). Throws ConfigError if the square is
/// non-positive (calibration range exceeded).
double omega_of_u(double u, const TrapCalibration& cal);

/// Rocking-mode frequency sqrt(omega_mf^2 - omega_lf^2). Throws ConfigError
/// on mode inversion (omega_mf <= omega_lf).
double rocking_from_modes(double omega_mf, double omega_lf);

/// rocking_from_modes(omega_of_u(u)), the full U -> omega_a map.
double rocking_of_u(double u, const TrapCalibration& cal);

/// Inverse of rocking_of_u. Throws ConfigError if not reachable.
double u_of_rocking(double omega_a, const TrapCalibration& cal);

/// Least-squares calibration from (U, omega_mf) pairs: fits kappa_rf and
/// omega_dc through omega_mf^2 = (kappa_rf U)^2 - omega_dc^2 (linear in
/// U^2), keeps the supplied omega_lf.
TrapCalibration fit_calibration(const std::vector<double>& u,
                                const std::vector<double>& omega_mf,
                                double omega_lf);

/// Default grid step for a given maximum frequency (see grid_dt config).
double default_grid_dt(double omega_max);

/// Ramp-down / hold / ramp-up pulse on a uniform grid with step <= grid_dt.
/// Optional settle padding keeps omega flat before and after the pulse.
FrequencyProfile build_pulse(const PulseSpec& spec, const TrapCalibration& cal,
                             double grid_dt, double t_settle_pre = 0.0,
                             double t_settle_post = 0.0);

/// Pulse / free evolution at u_high / identical second pulse.
FrequencyProfile build_echo(const PulseSpec& spec, double t_free,
                            const TrapCalibration& cal, double grid_dt,
                            double t_settle_pre = 0.0,
                            double t_settle_post = 0.0);

/// Single smooth ramp between two voltages with optional flat padding.
FrequencyProfile build_ramp(double u_from, double u_to, double t_ramp,
                            int smooth_order, const TrapCalibration& cal,
                            double grid_dt, double t_settle_pre = 0.0,
                            double t_settle_post = 0.0);

/// Near-instantaneous frequency step omega_from -> omega_to in frequency
/// space (no calibration), for sudden-limit studies. The transition is a
/// smooth-step of width step_width on a locally refined grid.
FrequencyProfile build_step(double omega_from, double omega_to, double t_pre,
                            double t_post, double step_width, double grid_dt);

/// First-order low-pass (bandwidth_hz) applied to the voltage waveform
/// u_of_rocking^-1(profile), re-mapped to frequency, then time-shifted by
/// t_delay. The filter is integrated exactly over each linear segment with
/// a steady-state start, so on a uniform grid it acts as a discrete LTI
/// filter and cascaded applications commute.
FrequencyProfile filter_distort(const FrequencyProfile& profile,
                                const TrapCalibration& cal,
                                double bandwidth_hz, double t_delay);

struct ProfileDiagnostics {
  std::vector<double> scale_factor;   ///< omega(t)/omega(t0)
  std::vector<double> adiabaticity;   ///< d(omega)/dt / omega^2
  std::vector<double> wkb_phase;      ///< cumulative integral of omega dt
  double e_foldings = 0.0;            ///< ln(omega_max/omega_min)
  double max_abs_adiabaticity = 0.0;
};

ProfileDiagnostics diagnostics(const FrequencyProfile& profile);

void write_profile_csv(const std::string& path,
                       const FrequencyProfile& profile);
FrequencyProfile read_profile_csv(const std::string& path);

std::string profile_to_json(const FrequencyProfile& profile);

}  // namespace pairsim::ramps
