#include "pairsim/ramps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pairsim/constants.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/io.hpp"

namespace pairsim::ramps {

namespace {

constexpr double kBoundaryEps = 1.0e-12;

double clamp01(double s) { return std::min(1.0, std::max(0.0, s)); }

/// Uniform grid over [0, total] with step <= grid_dt and exact endpoints.
std::vector<double> uniform_grid(double total, double grid_dt) {
  if (!(total > 0.0)) throw ConfigError("profile duration must be positive");
  if (!(grid_dt > 0.0)) throw ConfigError("grid_dt must be positive");
  const auto n_int = static_cast<std::size_t>(
      std::max(2.0, std::ceil(total / grid_dt - 1.0e-9)));
  const double dt = total / static_cast<double>(n_int);
  std::vector<double> t(n_int + 1);
  for (std::size_t i = 0; i <= n_int; ++i) t[i] = dt * static_cast<double>(i);
  t.back() = total;
  return t;
}

}  // namespace

void TrapCalibration::validate(double u_min, double u_max) const {
  if (!(kappa_rf > 0.0)) throw ConfigError("kappa_rf must be positive");
  if (omega_dc < 0.0) throw ConfigError("omega_dc must be non-negative");
  if (!(omega_lf > 0.0)) throw ConfigError("omega_lf must be positive");
  if (!(u_min > 0.0) || u_max < u_min)
    throw ConfigError("voltage range must satisfy 0 < u_min <= u_max");
  // rocking_of_u throws ConfigError if either endpoint is out of range; the
  // map is monotone in U, so the endpoints bound the interval.
  rocking_of_u(u_min, *this);
  rocking_of_u(u_max, *this);
}

void PulseSpec::validate() const {
  if (!(t_ramp > 0.0)) throw ConfigError("t_ramp must be positive");
  if (t_hold < 0.0) throw ConfigError("t_hold must be non-negative");
  if (!(u_high > u_low) || !(u_low > 0.0))
    throw ConfigError("pulse requires U_high > U_low > 0");
  if (smooth_order < 1 || smooth_order > 4)
    throw ConfigError("smooth_order must be in [1, 4]");
  if (t_delay < 0.0) throw ConfigError("t_delay must be non-negative");
  if (filter_bandwidth < 0.0)
    throw ConfigError("filter_bandwidth must be non-negative");
}

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Ramp: return "ramp";
    case SegmentKind::Hold: return "hold";
    case SegmentKind::Free: return "free";
  }
  throw ConfigError("unknown segment kind");
}

SegmentKind segment_kind_from_string(const std::string& name) {
  if (name == "ramp") return SegmentKind::Ramp;
  if (name == "hold") return SegmentKind::Hold;
  if (name == "free") return SegmentKind::Free;
  throw ConfigError("unknown segment label: " + name);
}

FrequencyProfile::FrequencyProfile(std::vector<double> times,
                                   std::vector<double> omega,
                                   std::vector<Segment> segments)
    : times_(std::move(times)),
      omega_(std::move(omega)),
      segments_(std::move(segments)) {
  if (times_.size() < 2) throw ConfigError("profile needs at least 2 samples");
  if (times_.size() != omega_.size())
    throw ConfigError("times/omega size mismatch");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw ConfigError("profile times must be strictly increasing");
  for (double w : omega_)
    if (!(w > 0.0) || !std::isfinite(w))
      throw ConfigError("profile omega must be positive and finite");
  for (const Segment& s : segments_)
    if (!(s.t_end > s.t_begin))
      throw ConfigError("profile segments must have positive length");
}

double FrequencyProfile::omega_at(double t) const {
  if (t <= times_.front()) return omega_.front();
  if (t >= times_.back()) return omega_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  return omega_[i] + w * (omega_[i + 1] - omega_[i]);
}

double FrequencyProfile::omega_min() const {
  return *std::min_element(omega_.begin(), omega_.end());
}

double FrequencyProfile::omega_max() const {
  return *std::max_element(omega_.begin(), omega_.end());
}

SegmentKind FrequencyProfile::segment_at(double t) const {
  for (const Segment& s : segments_)
    if (t >= s.t_begin - kBoundaryEps && t < s.t_end) return s.kind;
  if (!segments_.empty() && t >= segments_.back().t_end - kBoundaryEps)
    return segments_.back().kind;
  return SegmentKind::Hold;
}

double ProfileCursor::omega_at(double t) {
  const auto& times = profile_->times();
  const auto& omega = profile_->omega();
  const std::size_t last = times.size() - 2;
  if (t <= times.front()) return omega.front();
  if (t >= times.back()) return omega.back();
  if (hint_ > last) hint_ = last;
  while (hint_ > 0 && t < times[hint_]) --hint_;
  while (hint_ < last && t >= times[hint_ + 1]) ++hint_;
  const double w = (t - times[hint_]) / (times[hint_ + 1] - times[hint_]);
  return omega[hint_] + w * (omega[hint_ + 1] - omega[hint_]);
}

double smoothstep(double s, int order) {
  if (s < -kBoundaryEps || s > 1.0 + kBoundaryEps)
    throw ConfigError("smoothstep argument outside [0, 1]");
  s = clamp01(s);
  switch (order) {
    case 1: return s * s * (3.0 - 2.0 * s);
    case 2: return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    case 3: return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
    case 4:
      return s * s * s * s * s *
             (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))));
    default: throw ConfigError("smoothstep order must be in [1, 4]");
  }
}

double omega_of_u(double u, const TrapCalibration& cal) {
  const double ku = cal.kappa_rf * u;
  const double sq = ku * ku - cal.omega_dc * cal.omega_dc;
  if (!(sq > 0.0))
    throw ConfigError("rf amplitude below calibration range: omega_mf^2 <= 0");
  return std::sqrt(sq);
}

double rocking_from_modes(double omega_mf, double omega_lf) {
  const double sq = omega_mf * omega_mf - omega_lf * omega_lf;
  if (!(sq > 0.0))
    throw ConfigError("mode inversion: omega_mf <= omega_lf, rocking mode unstable");
  return std::sqrt(sq);
}

double rocking_of_u(double u, const TrapCalibration& cal) {
  return rocking_from_modes(omega_of_u(u, cal), cal.omega_lf);
}

double u_of_rocking(double omega_a, const TrapCalibration& cal) {
  if (!(omega_a > 0.0)) throw ConfigError("rocking frequency must be positive");
  if (!(cal.kappa_rf > 0.0)) throw ConfigError("kappa_rf must be positive");
  const double sq = omega_a * omega_a + cal.omega_lf * cal.omega_lf +
                    cal.omega_dc * cal.omega_dc;
  return std::sqrt(sq) / cal.kappa_rf;
}

TrapCalibration fit_calibration(const std::vector<double>& u,
                                const std::vector<double>& omega_mf,
                                double omega_lf) {
  if (u.size() != omega_mf.size() || u.size() < 2)
    throw ConfigError("calibration fit needs >= 2 (U, omega_mf) pairs");
  // omega_mf^2 = kappa^2 U^2 - omega_dc^2 is linear in x = U^2.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double y_scale = 0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u[i] * u[i];
    const double y = omega_mf[i] * omega_mf[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    y_scale = std::max(y_scale, std::abs(y));
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0))
    throw ConfigError("calibration fit is degenerate: distinct U values required");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  if (!(slope > 0.0))
    throw ConfigError("calibration fit produced non-positive kappa_rf^2");
  if (intercept > 1.0e-9 * y_scale)
    throw ConfigError("calibration fit produced negative omega_dc^2");
  TrapCalibration cal;
  cal.kappa_rf = std::sqrt(slope);
  cal.omega_dc = std::sqrt(std::max(0.0, -intercept));
  cal.omega_lf = omega_lf;
  return cal;
}

double default_grid_dt(double omega_max) {
  if (!(omega_max > 0.0)) throw ConfigError("omega_max must be positive");
  return 1.0 / (400.0 * omega_max);
}

namespace {

/// Shared builder: samples a voltage program u(t) on a uniform grid and maps
/// it through the calibration.
FrequencyProfile build_from_voltage(double total, double grid_dt,
                                    const TrapCalibration& cal,
                                    const std::vector<Segment>& segments,
                                    const std::function<double(double)>& u_of_t) {
  std::vector<double> times = uniform_grid(total, grid_dt);
  std::vector<double> omega(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    omega[i] = rocking_of_u(u_of_t(times[i]), cal);
  return FrequencyProfile(std::move(times), std::move(omega), segments);
}

/// Voltage during one pulse at local time x in [0, 2 t_ramp + t_hold].
double pulse_voltage(const PulseSpec& spec, double x) {
  if (x <= 0.0) return spec.u_high;
  if (x < spec.t_ramp) {
    const double s = smoothstep(clamp01(x / spec.t_ramp), spec.smooth_order);
    return spec.u_high + (spec.u_low - spec.u_high) * s;
  }
  x -= spec.t_ramp;
  if (x < spec.t_hold) return spec.u_low;
  x -= spec.t_hold;
  if (x < spec.t_ramp) {
    const double s = smoothstep(clamp01(x / spec.t_ramp), spec.smooth_order);
    return spec.u_low + (spec.u_high - spec.u_low) * s;
  }
  return spec.u_high;
}

void append_segment(std::vector<Segment>& segs, SegmentKind kind, double& t,
                    double len) {
  if (len <= 0.0) return;
  segs.push_back({kind, t, t + len});
  t += len;
}

}  // namespace

FrequencyProfile build_pulse(const PulseSpec& spec, const TrapCalibration& cal,
                             double grid_dt, double t_settle_pre,
                             double t_settle_post) {
  spec.validate();
  cal.validate(spec.u_low, spec.u_high);
  if (t_settle_pre < 0.0 || t_settle_post < 0.0)
    throw ConfigError("settle padding must be non-negative");
  const double t_pulse = 2.0 * spec.t_ramp + spec.t_hold;
  const double total = t_settle_pre + t_pulse + t_settle_post;
  std::vector<Segment> segs;
  double t = 0.0;
  append_segment(segs, SegmentKind::Hold, t, t_settle_pre);
  append_segment(segs, SegmentKind::Ramp, t, spec.t_ramp);
  append_segment(segs, SegmentKind::Hold, t, spec.t_hold);
  append_segment(segs, SegmentKind::Ramp, t, spec.t_ramp);
  append_segment(segs, SegmentKind::Hold, t, t_settle_post);
  return build_from_voltage(total, grid_dt, cal, segs, [&](double tt) {
    return pulse_voltage(spec, tt - t_settle_pre);
  });
}

FrequencyProfile build_echo(const PulseSpec& spec, double t_free,
                            const TrapCalibration& cal, double grid_dt,
                            double t_settle_pre, double t_settle_post) {
  spec.validate();
  cal.validate(spec.u_low, spec.u_high);
  if (t_free < 0.0) throw ConfigError("t_free must be non-negative");
  if (t_settle_pre < 0.0 || t_settle_post < 0.0)
    throw ConfigError("settle padding must be non-negative");
  const double t_pulse = 2.0 * spec.t_ramp + spec.t_hold;
  const double total = t_settle_pre + 2.0 * t_pulse + t_free + t_settle_post;
  std::vector<Segment> segs;
  double t = 0.0;
  append_segment(segs, SegmentKind::Hold, t, t_settle_pre);
  append_segment(segs, SegmentKind::Ramp, t, spec.t_ramp);
  append_segment(segs, SegmentKind::Hold, t, spec.t_hold);
  append_segment(segs, SegmentKind::Ramp, t, spec.t_ramp);
  append_segment(segs, SegmentKind::Free, t, t_free);
  append_segment(segs, SegmentKind::Ramp, t, spec.t_ramp);
  append_segment(segs, SegmentKind::Hold, t, spec.t_hold);
  append_segment(segs, SegmentKind::Ramp, t, spec.t_ramp);
  append_segment(segs, SegmentKind::Hold, t, t_settle_post);
  return build_from_voltage(total, grid_dt, cal, segs, [&](double tt) {
    double x = tt - t_settle_pre;
    if (x <= t_pulse) return pulse_voltage(spec, x);
    x -= t_pulse;
    if (x <= t_free) return spec.u_high;
    return pulse_voltage(spec, x - t_free);
  });
}

FrequencyProfile build_ramp(double u_from, double u_to, double t_ramp,
                            int smooth_order, const TrapCalibration& cal,
                            double grid_dt, double t_settle_pre,
                            double t_settle_post) {
  if (!(t_ramp > 0.0)) throw ConfigError("t_ramp must be positive");
  if (smooth_order < 1 || smooth_order > 4)
    throw ConfigError("smooth_order must be in [1, 4]");
  if (t_settle_pre < 0.0 || t_settle_post < 0.0)
    throw ConfigError("settle padding must be non-negative");
  cal.validate(std::min(u_from, u_to), std::max(u_from, u_to));
  const double total = t_settle_pre + t_ramp + t_settle_post;
  std::vector<Segment> segs;
  double t = 0.0;
  append_segment(segs, SegmentKind::Hold, t, t_settle_pre);
  append_segment(segs, SegmentKind::Ramp, t, t_ramp);
  append_segment(segs, SegmentKind::Hold, t, t_settle_post);
  return build_from_voltage(total, grid_dt, cal, segs, [&](double tt) {
    const double x = tt - t_settle_pre;
    if (x <= 0.0) return u_from;
    if (x >= t_ramp) return u_to;
    return u_from + (u_to - u_from) * smoothstep(clamp01(x / t_ramp), smooth_order);
  });
}

FrequencyProfile build_step(double omega_from, double omega_to, double t_pre,
                            double t_post, double step_width, double grid_dt) {
  if (!(omega_from > 0.0) || !(omega_to > 0.0))
    throw ConfigError("step frequencies must be positive");
  if (!(t_pre > 0.0) || !(t_post > 0.0))
    throw ConfigError("step profile needs positive padding on both sides");
  if (!(step_width > 0.0) || !(grid_dt > 0.0))
    throw ConfigError("step_width and grid_dt must be positive");

  std::vector<double> times;
  const auto extend = [&](double from, double to, double dt_max) {
    const auto n = static_cast<std::size_t>(
        std::max(1.0, std::ceil((to - from) / dt_max - 1.0e-9)));
    const double dt = (to - from) / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i)
      times.push_back(from + dt * static_cast<double>(i));
    times.back() = to;
  };
  times.push_back(0.0);
  extend(0.0, t_pre, grid_dt);
  extend(t_pre, t_pre + step_width, step_width / 64.0);
  extend(t_pre + step_width, t_pre + step_width + t_post, grid_dt);

  std::vector<double> omega(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double x = (times[i] - t_pre) / step_width;
    if (x <= 0.0)
      omega[i] = omega_from;
    else if (x >= 1.0)
      omega[i] = omega_to;
    else
      omega[i] = omega_from + (omega_to - omega_from) * smoothstep(x, 2);
  }
  const std::vector<Segment> segs = {
      {SegmentKind::Hold, 0.0, t_pre},
      {SegmentKind::Ramp, t_pre, t_pre + step_width},
      {SegmentKind::Hold, t_pre + step_width, t_pre + step_width + t_post}};
  return FrequencyProfile(std::move(times), std::move(omega), segs);
}

FrequencyProfile filter_distort(const FrequencyProfile& profile,
                                const TrapCalibration& cal,
                                double bandwidth_hz, double t_delay) {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("filter bandwidth must be positive");
  if (t_delay < 0.0) throw ConfigError("t_delay must be non-negative");
  const double tau = 1.0 / (kTwoPi * bandwidth_hz);

  const auto& times = profile.times();
  std::vector<double> u(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    u[i] = u_of_rocking(profile.omega()[i], cal);

  // Exact response of tau y' = u - y to the piecewise-linear input, sampled
  // on the grid; steady-state start y(0) = u(0).
  std::vector<double> y(u.size());
  y[0] = u[0];
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double dt = times[i + 1] - times[i];
    const double m = (u[i + 1] - u[i]) / dt;
    const double decay = std::exp(-dt / tau);
    y[i + 1] = u[i + 1] - m * tau + (y[i] - u[i] + m * tau) * decay;
  }

  std::vector<double> new_times(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) new_times[i] = times[i] + t_delay;
  std::vector<double> omega(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) omega[i] = rocking_of_u(y[i], cal);
  std::vector<Segment> segs = profile.segments();
  for (Segment& s : segs) {
    s.t_begin += t_delay;
    s.t_end += t_delay;
  }
  return FrequencyProfile(std::move(new_times), std::move(omega), std::move(segs));
}

ProfileDiagnostics diagnostics(const FrequencyProfile& profile) {
  const auto& t = profile.times();
  const auto& w = profile.omega();
  const std::size_t n = t.size();
  ProfileDiagnostics d;
  d.scale_factor.resize(n);
  d.adiabaticity.resize(n);
  d.wkb_phase.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.scale_factor[i] = w[i] / w[0];
  for (std::size_t i = 0; i < n; ++i) {
    double dwdt;
    if (i == 0)
      dwdt = (w[1] - w[0]) / (t[1] - t[0]);
    else if (i == n - 1)
      dwdt = (w[n - 1] - w[n - 2]) / (t[n - 1] - t[n - 2]);
    else
      dwdt = (w[i + 1] - w[i - 1]) / (t[i + 1] - t[i - 1]);
    d.adiabaticity[i] = dwdt / (w[i] * w[i]);
    d.max_abs_adiabaticity =
        std::max(d.max_abs_adiabaticity, std::abs(d.adiabaticity[i]));
  }
  d.wkb_phase[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    d.wkb_phase[i] =
        d.wkb_phase[i - 1] + 0.5 * (w[i] + w[i - 1]) * (t[i] - t[i - 1]);
  d.e_foldings = std::log(profile.omega_max() / profile.omega_min());
  return d;
}

void write_profile_csv(const std::string& path,
                       const FrequencyProfile& profile) {
  std::ostringstream out;
  out << "t_seconds,omega_rad_per_s,segment_label\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    out << io::format_double(profile.times()[i]) << ','
        << io::format_double(profile.omega()[i]) << ','
        << to_string(profile.segment_at(profile.times()[i])) << '\n';
  }
  io::write_text_file(path, out.str());
}

FrequencyProfile read_profile_csv(const std::string& path) {
  const io::CsvTable table = io::read_csv(path);
  if (table.header != std::vector<std::string>{"t_seconds", "omega_rad_per_s",
                                               "segment_label"})
    throw IoError(path + ": unexpected profile CSV header");
  std::vector<double> times, omega;
  std::vector<Segment> segs;
  std::string run_label;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    try {
      times.push_back(std::stod(row.at(0)));
      omega.push_back(std::stod(row.at(1)));
    } catch (const std::exception&) {
      throw IoError(path + ": bad numeric value at row " + std::to_string(i + 2));
    }
    const std::string& label = row.at(2);
    if (label != run_label) {
      if (!segs.empty()) segs.back().t_end = times.back();
      segs.push_back({segment_kind_from_string(label), times.back(), times.back()});
      run_label = label;
    }
  }
  if (times.empty()) throw IoError(path + ": empty profile");
  if (!segs.empty()) segs.back().t_end = times.back();
  // Zero-length head segments can appear when a label run has one sample.
  std::vector<Segment> cleaned;
  for (const Segment& s : segs)
    if (s.t_end > s.t_begin) cleaned.push_back(s);
  return FrequencyProfile(std::move(times), std::move(omega), std::move(cleaned));
}

std::string profile_to_json(const FrequencyProfile& profile) {
  nlohmann::json j;
  j["times"] = profile.times();
  j["omega"] = profile.omega();
  nlohmann::json segs = nlohmann::json::array();
  for (const Segment& s : profile.segments()) {
    segs.push_back({{"kind", to_string(s.kind)},
                    {"t_begin", s.t_begin},
                    {"t_end", s.t_end}});
  }
  j["segments"] = segs;
  return j.dump(2);
}

}  // namespace pairsim::ramps
