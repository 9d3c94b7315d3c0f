#include "pairsim/cosmo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "pairsim/constants.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/io.hpp"

namespace pairsim::cosmo {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FlrwProper: return "flrw_proper";
    case ScenarioKind::FlrwConformal: return "flrw_conformal";
    case ScenarioKind::VectorField: return "vector_field";
    case ScenarioKind::SauterSchwinger: return "sauter_schwinger";
    case ScenarioKind::Hawking: return "hawking";
  }
  throw ConfigError("unknown scenario kind");
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "flrw_proper") return ScenarioKind::FlrwProper;
  if (name == "flrw_conformal") return ScenarioKind::FlrwConformal;
  if (name == "vector_field") return ScenarioKind::VectorField;
  if (name == "sauter_schwinger") return ScenarioKind::SauterSchwinger;
  if (name == "hawking") return ScenarioKind::Hawking;
  throw ConfigError("unknown scenario kind: " + name);
}

History History::analytic(std::function<double(double)> value,
                          std::function<double(double)> d1,
                          std::function<double(double)> d2) {
  if (!value || !d1 || !d2)
    throw ConfigError("analytic history needs value and both derivatives");
  History h;
  h.value_ = std::move(value);
  h.d1_ = std::move(d1);
  h.d2_ = std::move(d2);
  return h;
}

History History::constant(double value) {
  return analytic([value](double) { return value; }, [](double) { return 0.0; },
                  [](double) { return 0.0; });
}

History History::de_sitter_proper(double hubble) {
  if (!(hubble > 0.0)) throw ConfigError("hubble rate must be positive");
  return analytic([hubble](double t) { return std::exp(hubble * t); },
                  [hubble](double t) { return hubble * std::exp(hubble * t); },
                  [hubble](double t) {
                    return hubble * hubble * std::exp(hubble * t);
                  });
}

History History::de_sitter_conformal(double hubble) {
  if (!(hubble > 0.0)) throw ConfigError("hubble rate must be positive");
  auto guard = [hubble](double t) {
    if (!(t < 0.0))
      throw ConfigError(
          "conformal de Sitter history is defined for t < 0 only");
    return -1.0 / (hubble * t);
  };
  return analytic(guard,
                  [hubble](double t) { return 1.0 / (hubble * t * t); },
                  [hubble](double t) { return -2.0 / (hubble * t * t * t); });
}

History History::power_law(double exponent, double t_ref) {
  if (!(t_ref > 0.0)) throw ConfigError("power-law t_ref must be positive");
  auto pow_at = [exponent, t_ref](double t, double shift) {
    if (!(t > 0.0))
      throw ConfigError("power-law history is defined for t > 0 only");
    return std::pow(t / t_ref, exponent - shift);
  };
  return analytic(
      [pow_at](double t) { return pow_at(t, 0.0); },
      [pow_at, exponent, t_ref](double t) {
        return exponent / t_ref * pow_at(t, 1.0);
      },
      [pow_at, exponent, t_ref](double t) {
        return exponent * (exponent - 1.0) / (t_ref * t_ref) * pow_at(t, 2.0);
      });
}

History History::sauter_pulse(double e0, double omega0) {
  if (!(omega0 > 0.0)) throw ConfigError("sauter pulse width must be positive");
  return analytic(
      [e0, omega0](double t) { return -e0 / omega0 * std::tanh(omega0 * t); },
      [e0, omega0](double t) {
        const double c = std::cosh(omega0 * t);
        return -e0 / (c * c);
      },
      [e0, omega0](double t) {
        const double c = std::cosh(omega0 * t);
        return 2.0 * e0 * omega0 * std::tanh(omega0 * t) / (c * c);
      });
}

namespace {

/// Least-squares quadratic through the window around index i, evaluated at
/// the center. Windows shrink one-sidedly near the edges.
double savgol_at(const std::vector<double>& y, int i, int half) {
  const int n = static_cast<int>(y.size());
  const int lo = std::max(0, i - half);
  const int hi = std::min(n - 1, i + half);
  const int m = hi - lo + 1;
  if (m < 3) return y[i];
  Eigen::MatrixXd v(m, 3);
  Eigen::VectorXd rhs(m);
  for (int j = 0; j < m; ++j) {
    const double x = static_cast<double>(lo + j - i);
    v(j, 0) = 1.0;
    v(j, 1) = x;
    v(j, 2) = x * x;
    rhs[j] = y[lo + j];
  }
  const Eigen::Vector3d coef = v.colPivHouseholderQr().solve(rhs);
  return coef[0];
}

std::vector<double> stencil_d1(const std::vector<double>& y, double dt) {
  const int n = static_cast<int>(y.size());
  std::vector<double> d(n);
  const double s = 1.0 / (12.0 * dt);
  d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) * s;
  d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) * s;
  for (int i = 2; i < n - 2; ++i)
    d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) * s;
  d[n - 2] = (3.0 * y[n - 1] + 10.0 * y[n - 2] - 18.0 * y[n - 3] +
              6.0 * y[n - 4] - y[n - 5]) * s;
  d[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] -
              16.0 * y[n - 4] + 3.0 * y[n - 5]) * s;
  return d;
}

std::vector<double> stencil_d2(const std::vector<double>& y, double dt) {
  const int n = static_cast<int>(y.size());
  std::vector<double> d(n);
  const double s = 1.0 / (12.0 * dt * dt);
  d[0] = (35.0 * y[0] - 104.0 * y[1] + 114.0 * y[2] - 56.0 * y[3] +
          11.0 * y[4]) * s;
  d[1] = (11.0 * y[0] - 20.0 * y[1] + 6.0 * y[2] + 4.0 * y[3] - y[4]) * s;
  for (int i = 2; i < n - 2; ++i)
    d[i] = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] -
            y[i + 2]) * s;
  d[n - 2] = (11.0 * y[n - 1] - 20.0 * y[n - 2] + 6.0 * y[n - 3] +
              4.0 * y[n - 4] - y[n - 5]) * s;
  d[n - 1] = (35.0 * y[n - 1] - 104.0 * y[n - 2] + 114.0 * y[n - 3] -
              56.0 * y[n - 4] + 11.0 * y[n - 5]) * s;
  return d;
}

}  // namespace

History History::from_samples(const std::vector<double>& times,
                              const std::vector<double>& values,
                              int smooth_window) {
  if (times.size() != values.size())
    throw ConfigError("history times and values differ in length");
  if (times.size() < 5)
    throw ConfigError("sampled history needs at least 5 points");
  if (smooth_window != 1 && (smooth_window < 5 || smooth_window % 2 == 0))
    throw ConfigError("smooth_window must be 1 or an odd number >= 5");
  const double dt = (times.back() - times.front()) /
                    static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw ConfigError("history times must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - dt) > 1.0e-9 * dt + 1.0e-30)
      throw ConfigError("sampled history requires a uniform time grid");
  }

  History h;
  h.grid_t0_ = times.front();
  h.grid_dt_ = dt;
  if (smooth_window == 1) {
    h.grid_v_ = values;
  } else {
    const int half = smooth_window / 2;
    h.grid_v_.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      h.grid_v_[i] = savgol_at(values, static_cast<int>(i), half);
  }
  h.grid_d1_ = stencil_d1(h.grid_v_, dt);
  h.grid_d2_ = stencil_d2(h.grid_v_, dt);
  return h;
}

double History::interp(const std::vector<double>& y, double t) const {
  const double x = (t - grid_t0_) / grid_dt_;
  const double n = static_cast<double>(y.size() - 1);
  if (x < -1.0e-9 || x > n + 1.0e-9)
    throw ConfigError("time " + io::format_double(t) +
                      " outside the sampled history");
  const int i = std::clamp(static_cast<int>(std::floor(x)), 0,
                           static_cast<int>(y.size()) - 2);
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * y[i] + f * y[i + 1];
}

double History::value(double t) const {
  if (value_) return value_(t);
  if (grid_v_.empty()) throw ConfigError("history is empty");
  return interp(grid_v_, t);
}

double History::d1(double t) const {
  if (d1_) return d1_(t);
  if (grid_v_.empty()) throw ConfigError("history is empty");
  return interp(grid_d1_, t);
}

double History::d2(double t) const {
  if (d2_) return d2_(t);
  if (grid_v_.empty()) throw ConfigError("history is empty");
  return interp(grid_d2_, t);
}

void ScenarioSpec::validate() const {
  if (mass < 0.0) throw ConfigError("mass must be non-negative");
  switch (kind) {
    case ScenarioKind::FlrwProper:
    case ScenarioKind::FlrwConformal:
    case ScenarioKind::VectorField:
      if (history.empty())
        throw ConfigError(to_string(kind) + " needs a scale history a(t)");
      break;
    case ScenarioKind::SauterSchwinger:
      break;  // empty history means A(t) = 0
    case ScenarioKind::Hawking:
      if (!(surface_gravity > 0.0))
        throw ConfigError("hawking scenario needs surface_gravity > 0");
      if (!(hawking_cutoff > 0.0))
        throw ConfigError("hawking_cutoff must be positive");
      break;
  }
}

namespace {

struct OmegaSq {
  const ScenarioSpec& spec;
  double c, hbar, mu2;  // mu2 = (m c^2 / hbar)^2

  double operator()(double t) const {
    const double ck = c * spec.mode_k;
    switch (spec.kind) {
      case ScenarioKind::FlrwProper: {
        const double a = positive_a(t);
        const double h1 = spec.history.d1(t) / a;
        const double h2 = spec.history.d2(t) / a;
        return mu2 + ck * ck / (a * a) - 1.5 * (h2 + 0.5 * h1 * h1);
      }
      case ScenarioKind::FlrwConformal: {
        const double a = positive_a(t);
        return a * a * mu2 + ck * ck - spec.history.d2(t) / a;
      }
      case ScenarioKind::VectorField: {
        const double a = positive_a(t);
        return a * a * mu2 + ck * ck;
      }
      case ScenarioKind::SauterSchwinger: {
        const double pot =
            spec.history.empty() ? 0.0 : spec.history.value(t);
        const double kin = spec.mode_k - spec.charge * pot / hbar;
        return c * c * kin * kin + mu2;
      }
      case ScenarioKind::Hawking: {
        const double kt = spec.surface_gravity * t;
        return ck * ck + mu2 / (kt * kt);
      }
    }
    throw ConfigError("unknown scenario kind");
  }

  double positive_a(double t) const {
    const double a = spec.history.value(t);
    if (!(a > 0.0))
      throw ConfigError("scale history must be positive (a(" +
                        io::format_double(t) + ") = " + io::format_double(a) +
                        ")");
    return a;
  }
};

[[noreturn]] void throw_tachyonic(const std::vector<double>& ts,
                                  const std::vector<double>& w2,
                                  std::size_t first) {
  std::size_t last = first;
  while (last + 1 < w2.size() && w2[last + 1] <= 0.0) ++last;
  throw NumericalError("tachyonic mode frequency (Omega^2 <= 0) on [" +
                       io::format_double(ts[first]) + ", " +
                       io::format_double(ts[last]) + "]");
}

}  // namespace

ramps::FrequencyProfile compile(const ScenarioSpec& spec, double t_begin,
                                double t_end, const CompileOptions& opts) {
  spec.validate();
  if (!(t_end > t_begin))
    throw ConfigError("compile window must have t_end > t_begin");
  if (opts.probe_points < 16 || opts.points_per_period < 8.0)
    throw ConfigError("compile options out of range");
  if (spec.kind == ScenarioKind::Hawking) {
    const double lo = spec.surface_gravity * t_begin;
    const double hi = spec.surface_gravity * t_end;
    if (lo * hi <= 0.0 ||
        std::min(std::abs(lo), std::abs(hi)) < spec.hawking_cutoff)
      throw ConfigError(
          "hawking window must stay on one side of the horizon, "
          "|kappa_sg * T| >= " +
          io::format_double(spec.hawking_cutoff));
  }

  const bool nat = spec.natural_units;
  const double c = nat ? 1.0 : kSpeedOfLight;
  const double hbar = nat ? 1.0 : kHbar;
  const double mu = nat ? spec.mass : spec.mass * c * c / hbar;
  const OmegaSq omega_sq{spec, c, hbar, mu * mu};

  auto sample = [&](std::size_t count) {
    std::vector<double> ts(count), w2(count);
    const double dt = (t_end - t_begin) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
      ts[i] = (i + 1 == count) ? t_end : t_begin + dt * static_cast<double>(i);
      w2[i] = omega_sq(ts[i]);
      if (!std::isfinite(w2[i]))
        throw NumericalError("mode frequency is not finite at t = " +
                             io::format_double(ts[i]));
    }
    return std::pair(std::move(ts), std::move(w2));
  };

  auto [probe_t, probe_w2] = sample(static_cast<std::size_t>(opts.probe_points) + 1);
  double w2_max = 0.0;
  for (std::size_t i = 0; i < probe_w2.size(); ++i) {
    if (probe_w2[i] <= 0.0) throw_tachyonic(probe_t, probe_w2, i);
    w2_max = std::max(w2_max, probe_w2[i]);
  }

  const double dt_grid = 1.0 / (opts.points_per_period * std::sqrt(w2_max));
  const double steps = std::ceil((t_end - t_begin) / dt_grid);
  if (steps > static_cast<double>(opts.max_grid))
    throw NumericalError("compiled grid would need " +
                         io::format_double(steps) +
                         " points; shrink the window or lower "
                         "points_per_period");
  const std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(steps), 16) + 1;

  auto [ts, w2] = sample(n);
  std::vector<double> omega(n);
  double w_min = std::numeric_limits<double>::infinity();
  double w_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w2[i] <= 0.0) throw_tachyonic(ts, w2, i);
    omega[i] = std::sqrt(w2[i]);
    w_min = std::min(w_min, omega[i]);
    w_max = std::max(w_max, omega[i]);
  }

  const auto kind = (w_max - w_min <= 1.0e-12 * w_max)
                        ? ramps::SegmentKind::Hold
                        : ramps::SegmentKind::Ramp;
  return ramps::FrequencyProfile(std::move(ts), std::move(omega),
                                 {{kind, t_begin, t_end}});
}

double keldysh(double omega_field, double m, double q, double e_field) {
  if (!(omega_field > 0.0) || !(m > 0.0) || !(q > 0.0))
    throw ConfigError("keldysh needs positive omega, mass and charge");
  if (e_field < 0.0) throw ConfigError("field strength must be >= 0");
  if (e_field == 0.0) return std::numeric_limits<double>::infinity();
  return omega_field * m * kSpeedOfLight / (q * e_field);
}

std::string keldysh_regime(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("keldysh parameter must be positive");
  return gamma < 1.0 ? "tunneling" : "multi-photon";
}

AnalogMap trap_to_cosmo(const ramps::FrequencyProfile& profile, double k,
                        double m, bool natural_units) {
  if (profile.size() < 2) throw ConfigError("profile is empty");
  if (!(m > 0.0)) throw ConfigError("mass must be positive");
  const double c = natural_units ? 1.0 : kSpeedOfLight;
  const double hbar = natural_units ? 1.0 : kHbar;
  const double ck2 = c * k * c * k;
  const double scale = hbar / (m * c * c);

  AnalogMap map;
  map.direction = MapDirection::TrapToCosmo;
  map.times = profile.times();
  map.a.resize(profile.size());
  double a_min = std::numeric_limits<double>::infinity();
  double a_max = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double s = profile.omega()[i] * profile.omega()[i] - ck2;
    if (s <= 0.0)
      throw NumericalError(
          "mode is unmappable: omega(t) <= c k at t = " +
          io::format_double(profile.times()[i]));
    map.a[i] = scale * std::sqrt(s);
    a_min = std::min(a_min, map.a[i]);
    a_max = std::max(a_max, map.a[i]);
  }
  map.e_foldings = std::log(a_max / a_min);
  return map;
}

std::vector<double> ion_mode_decomposition(
    double omega_rad, const std::vector<double>& coulomb_eigs) {
  std::vector<double> out(coulomb_eigs.size());
  for (std::size_t i = 0; i < coulomb_eigs.size(); ++i) {
    const double s = omega_rad * omega_rad + coulomb_eigs[i];
    if (s <= 0.0)
      throw NumericalError("mode " + std::to_string(i) +
                           " is unstable: omega_rad^2 + lambda = " +
                           io::format_double(s));
    out[i] = std::sqrt(s);
  }
  return out;
}

}  // namespace pairsim::cosmo
