#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pairsim/ramps.hpp"

namespace pairsim::cosmo {

/// Scenario families mapped onto the single-oscillator equation
/// d^2phi/dt^2 + Omega^2(t) phi = 0.
enum class ScenarioKind {
  FlrwProper,      ///< minimally coupled scalar, proper time
  FlrwConformal,   ///< minimally coupled scalar, conformal time
  VectorField,     ///< transverse vector field, conformal time
  SauterSchwinger, ///< charged mode in a homogeneous electric pulse
  Hawking,         ///< near-horizon Kruskal mode
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

/// Scalar history h(t) carrying its first two derivatives: the scale
/// parameter a(t) for the expansion scenarios, the vector potential A(t)
/// for Sauter-Schwinger.
///
/// Analytic presets differentiate exactly. Sampled histories are smoothed
/// with a local quadratic (Savitzky-Golay) filter and differentiated with
/// five-point stencils, since the second derivative enters the mode
/// frequency and amplifies sampling noise.
class History {
 public:
  History() = default;

  static History analytic(std::function<double(double)> value,
                          std::function<double(double)> d1,
                          std::function<double(double)> d2);
  static History constant(double value);
  /// a(tau) = exp(H tau), any tau.
  static History de_sitter_proper(double hubble);
  /// a(t) = -1/(H t), conformal time t < 0.
  static History de_sitter_conformal(double hubble);
  /// a(t) = (t / t_ref)^exponent, t > 0.
  static History power_law(double exponent, double t_ref);
  /// Sauter pulse A(t) = -(e0/omega0) tanh(omega0 t), i.e. E = -dA/dt
  /// peaking at e0 with temporal width 1/omega0.
  static History sauter_pulse(double e0, double omega0);
  /// Uniformly sampled history; smooth_window is the odd Savitzky-Golay
  /// window length (>= 5; 1 disables smoothing).
  static History from_samples(const std::vector<double>& times,
                              const std::vector<double>& values,
                              int smooth_window = 7);

  bool empty() const { return !value_ && grid_v_.empty(); }

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;

 private:
  std::function<double(double)> value_, d1_, d2_;
  // sampled representation (uniform grid)
  double grid_t0_ = 0.0;
  double grid_dt_ = 0.0;
  std::vector<double> grid_v_, grid_d1_, grid_d2_;

  double interp(const std::vector<double>& y, double t) const;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::VectorField;
  History history;        ///< a(t), or A(t) for SauterSchwinger; unused for Hawking
  double mode_k = 0.0;    ///< 1/m (Kruskal wavenumber K for Hawking)
  double mass = 0.0;      ///< kg in SI mode, rad/s (m c^2/hbar) in natural units
  double charge = 0.0;    ///< C, SauterSchwinger only
  double surface_gravity = 0.0;  ///< 1/s, Hawking only
  double hawking_cutoff = 1.0e-3;  ///< smallest allowed |kappa T| on the window
  bool natural_units = true;     ///< c = hbar = 1

  void validate() const;
};

struct CompileOptions {
  int probe_points = 2048;          ///< coarse scan for max frequency / tachyons
  double points_per_period = 400.0; ///< output grid density at the peak frequency
  std::size_t max_grid = 4000000;   ///< refuse finer output grids
};

/// Evaluates the scenario's mode frequency on [t_begin, t_end] and packages
/// it as a trap frequency profile. Throws NumericalError with the offending
/// interval if Omega^2 <= 0 anywhere on the window (tachyonic band).
ramps::FrequencyProfile compile(const ScenarioSpec& spec, double t_begin,
                                double t_end,
                                const CompileOptions& opts = {});

/// Relativistic Keldysh parameter gamma = omega m c / (q E), SI inputs.
/// E = 0 returns +infinity (perturbative limit).
double keldysh(double omega_field, double m, double q, double e_field);

/// "tunneling" below gamma = 1, "multi-photon" above.
std::string keldysh_regime(double gamma);

enum class MapDirection { CosmoToTrap, TrapToCosmo };

/// Scale-parameter history read off a trap profile.
struct AnalogMap {
  MapDirection direction = MapDirection::TrapToCosmo;
  std::vector<double> times;
  std::vector<double> a;     ///< hbar sqrt(omega^2 - c^2 k^2) / (m c^2)
  double e_foldings = 0.0;   ///< ln(max a / min a)
};

/// Inverts the dictionary omega^2 = c^2 k^2 + a^2 m^2 c^4 / hbar^2 along the
/// profile. Throws NumericalError if omega^2 <= c^2 k^2 anywhere (the mode
/// cannot be mapped to an expanding background).
AnalogMap trap_to_cosmo(const ramps::FrequencyProfile& profile, double k,
                        double m, bool natural_units = false);

/// Normal-mode frequencies Omega_I = sqrt(omega_rad^2 + lambda_I) of an ion
/// crystal whose Coulomb eigenvalues lambda_I play the role of c^2 k^2.
/// Throws NumericalError naming the first unstable mode.
std::vector<double> ion_mode_decomposition(
    double omega_rad, const std::vector<double>& coulomb_eigs);

}  // namespace pairsim::cosmo
