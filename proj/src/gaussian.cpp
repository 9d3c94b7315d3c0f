#include "pairsim/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "pairsim/constants.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/io.hpp"

namespace pairsim::gaussian {

namespace ode = boost::numeric::odeint;

GaussianState GaussianState::vacuum(double omega_ref) {
  GaussianState s;
  s.omega_ref = omega_ref;
  s.validate();
  return s;
}

GaussianState GaussianState::thermal(double n_bar, double omega_ref) {
  if (n_bar < 0.0) throw ConfigError("n_bar must be non-negative");
  GaussianState s;
  s.cov = Eigen::Matrix2d::Identity() * (0.5 + n_bar);
  s.omega_ref = omega_ref;
  s.validate();
  return s;
}

GaussianState GaussianState::rescaled(double new_omega_ref) const {
  if (!(new_omega_ref > 0.0))
    throw ConfigError("reference frequency must be positive");
  const double g = std::sqrt(new_omega_ref / omega_ref);
  GaussianState out;
  out.omega_ref = new_omega_ref;
  out.mean = Eigen::Vector2d(mean(0) * g, mean(1) / g);
  Eigen::Matrix2d scale;
  scale << g, 0.0, 0.0, 1.0 / g;
  out.cov = scale * cov * scale;
  return out;
}

double GaussianState::purity() const { return 0.5 / std::sqrt(cov.determinant()); }

void GaussianState::validate() const {
  if (!(omega_ref > 0.0))
    throw ConfigError("reference frequency must be positive");
  if (std::abs(cov(0, 1) - cov(1, 0)) > 1.0e-12)
    throw NumericalError("covariance matrix not symmetric");
  const double det = cov.determinant();
  if (cov(0, 0) <= 0.0 || cov(1, 1) <= 0.0 || det < 0.25 - 1.0e-12)
    throw NumericalError("covariance violates the Heisenberg bound");
}

GaussianState TransferMatrix::apply(const GaussianState& in) const {
  GaussianState out;
  out.omega_ref = omega_ref;
  out.mean = s * in.mean + d;
  out.cov = s * in.cov * s.transpose();
  // Symmetrize away roundoff so chained applications stay valid.
  out.cov(0, 1) = out.cov(1, 0) = 0.5 * (out.cov(0, 1) + out.cov(1, 0));
  return out;
}

double TransferMatrix::symplectic_defect() const {
  return std::abs(s.determinant() - 1.0);
}

namespace {

using OdeState = std::array<double, 6>;

struct Rhs {
  ramps::ProfileCursor cursor;
  double omega0;
  double drive_unit;  ///< 1 / sqrt(m hbar omega0), 0 when driveless
  const std::function<double(double)>* shape;

  void operator()(const OdeState& y, OdeState& dydt, double t) {
    const double w = cursor.omega_at(t);
    const double k = w * w / omega0;
    dydt[0] = omega0 * y[1];
    dydt[1] = -k * y[0];
    dydt[2] = omega0 * y[3];
    dydt[3] = -k * y[2];
    double f = drive_unit;
    if (f != 0.0 && shape && *shape) f *= (*shape)(t);
    dydt[4] = f * y[2];
    dydt[5] = -f * y[0];
  }
};

}  // namespace

Trajectory evolve(const GaussianState& initial,
                  const ramps::FrequencyProfile& profile, const Drive& drive,
                  const EvolveOptions& opts) {
  initial.validate();
  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
    throw ConfigError("integrator tolerances must be positive");
  const double omega0 = profile.omega_at(profile.t_begin());
  if (std::abs(initial.omega_ref - omega0) > 1.0e-9 * omega0)
    throw ConfigError(
        "initial state must be referenced at the profile's initial frequency");
  if (drive.force_newton != 0.0 && !(drive.mass_kg > 0.0))
    throw ConfigError("drive with nonzero force requires a positive mass");

  std::vector<double> times = opts.output_times;
  if (times.empty()) {
    const std::size_t n = std::min<std::size_t>(profile.size(), 2001);
    times.resize(n);
    const double t0 = profile.t_begin();
    const double span = profile.duration();
    for (std::size_t i = 0; i < n; ++i)
      times[i] = t0 + span * static_cast<double>(i) / static_cast<double>(n - 1);
    times.back() = profile.t_end();
  } else {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < profile.t_begin() - 1.0e-15 ||
          times[i] > profile.t_end() + 1.0e-15)
        throw ConfigError("output time outside the profile window");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw ConfigError("output times must be strictly increasing");
    }
  }
  bool skip_first = false;
  if (times.front() > profile.t_begin()) {
    times.insert(times.begin(), profile.t_begin());
    skip_first = true;
  }

  Rhs rhs{ramps::ProfileCursor(profile), omega0,
          drive.force_newton != 0.0
              ? 1.0 / std::sqrt(drive.mass_kg * kHbar * omega0)
              : 0.0,
          &drive.shape};
  auto system = [&rhs](const OdeState& yy, OdeState& dydt, double t) {
    rhs(yy, dydt, t);
  };

  OdeState y{1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  Trajectory traj;
  traj.initial = initial;
  const std::size_t n_out = times.size();
  traj.times.reserve(n_out);
  traj.omega_inst.reserve(n_out);
  traj.transfers.reserve(n_out);
  traj.states.reserve(n_out);

  const double f0 = drive.force_newton;
  auto observer = [&](const OdeState& s, double t) {
    TransferMatrix tm;
    tm.omega_ref = omega0;
    tm.s << s[0], s[2], s[1], s[3];
    tm.d = f0 * (tm.s * Eigen::Vector2d(s[4], s[5]));
    traj.times.push_back(t);
    traj.omega_inst.push_back(profile.omega_at(t));
    traj.transfers.push_back(tm);
    traj.states.push_back(tm.apply(initial));
  };

  try {
    auto stepper = ode::make_controlled(opts.abs_tol, opts.rel_tol,
                                        ode::runge_kutta_dopri5<OdeState>());
    const double dt0 =
        std::min(0.05 / profile.omega_max(), profile.duration() / 16.0);
    ode::integrate_times(stepper, system, y, times.begin(), times.end(), dt0,
                         observer);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("quadrature integrator failed: ") + e.what());
  }

  if (skip_first) {
    traj.times.erase(traj.times.begin());
    traj.omega_inst.erase(traj.omega_inst.begin());
    traj.transfers.erase(traj.transfers.begin());
    traj.states.erase(traj.states.begin());
  }

  double worst = 0.0;
  for (const TransferMatrix& tm : traj.transfers)
    worst = std::max(worst, tm.symplectic_defect());
  if (worst > 1.0e-8)
    throw NumericalError("integrator tolerance not met: symplectic defect " +
                         io::format_double(worst));
  return traj;
}

SqueezeParams squeeze_params(const GaussianState& state) {
  const double a = state.cov(0, 0);
  const double b = 0.5 * (state.cov(0, 1) + state.cov(1, 0));
  const double c = state.cov(1, 1);
  const double tr = a + c;
  const double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
  const double hi = 0.5 * (tr + disc);
  const double lo = 0.5 * (tr - disc);
  SqueezeParams out;
  out.r = 0.25 * std::log(hi / lo);
  out.n_th = std::sqrt(hi * lo) - 0.5;
  if (disc <= 1.0e-14 * tr) {
    out.theta = 0.0;
    return out;
  }
  // Major-axis angle of the covariance ellipse; the squeezed (minor) axis
  // sits a quarter turn away.
  const double major = 0.5 * std::atan2(2.0 * b, a - c);
  double theta = major + 0.5 * kPi;
  while (theta < 0.0) theta += kPi;
  while (theta >= kPi) theta -= kPi;
  out.theta = theta;
  return out;
}

std::complex<double> displacement(const GaussianState& state) {
  return {state.mean(0) / std::sqrt(2.0), state.mean(1) / std::sqrt(2.0)};
}

double mean_phonons(const GaussianState& state) {
  return 0.5 * (state.cov(0, 0) + state.cov(1, 1) + state.mean(0) * state.mean(0) +
                state.mean(1) * state.mean(1) - 1.0);
}

BogoliubovCoeffs bogoliubov(const TransferMatrix& tm, double omega_in,
                            double omega_out) {
  if (!(omega_in > 0.0) || !(omega_out > 0.0))
    throw ConfigError("mode frequencies must be positive");
  if (tm.symplectic_defect() > 1.0e-8)
    throw NumericalError("non-symplectic transfer matrix: defect " +
                         io::format_double(tm.symplectic_defect()));
  const double w0 = tm.omega_ref;
  const std::complex<double> i(0.0, 1.0);
  // Positive-frequency in-mode in (X, P) coordinates: X(0)=1, P(0)=-i w_in/w0.
  const std::complex<double> x = tm.s(0, 0) - i * (omega_in / w0) * tm.s(0, 1);
  const std::complex<double> p = tm.s(1, 0) - i * (omega_in / w0) * tm.s(1, 1);
  const double scale = 0.5 * std::sqrt(omega_out / omega_in);
  BogoliubovCoeffs out;
  out.alpha = scale * (x + i * (w0 / omega_out) * p);
  out.beta = scale * (x - i * (w0 / omega_out) * p);
  if (out.defect() > 1.0e-8)
    throw NumericalError("Bogoliubov normalization violated: defect " +
                         io::format_double(out.defect()));
  return out;
}

double squeezing_db(double r) {
  if (r < 0.0) throw ConfigError("squeezing parameter must be non-negative");
  return (20.0 / std::log(10.0)) * r;
}

double squeezed_phonons(double r) {
  const double s = std::sinh(r);
  return s * s;
}

std::vector<TrajectoryRow> physical_rows(const Trajectory& traj) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(traj.times.size());
  const double omega_in = traj.initial.omega_ref;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const GaussianState& s = traj.states[k];
    const GaussianState phys = s.rescaled(traj.omega_inst[k]);
    TrajectoryRow row;
    row.t = traj.times[k];
    row.mean_x = s.mean(0);
    row.mean_p = s.mean(1);
    row.cov_xx = s.cov(0, 0);
    row.cov_xp = 0.5 * (s.cov(0, 1) + s.cov(1, 0));
    row.cov_pp = s.cov(1, 1);
    row.r = squeeze_params(phys).r;
    row.abs_alpha = std::abs(displacement(phys));
    row.n_pair = bogoliubov(traj.transfers[k], omega_in, traj.omega_inst[k]).n_pair();
    rows.push_back(row);
  }
  return rows;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows) {
  std::ostringstream out;
  out << "t,meanX,meanP,covXX,covXP,covPP,r,abs_alpha,n_pair\n";
  for (const TrajectoryRow& r : rows) {
    out << io::format_double(r.t) << ',' << io::format_double(r.mean_x) << ','
        << io::format_double(r.mean_p) << ',' << io::format_double(r.cov_xx)
        << ',' << io::format_double(r.cov_xp) << ','
        << io::format_double(r.cov_pp) << ',' << io::format_double(r.r) << ','
        << io::format_double(r.abs_alpha) << ','
        << io::format_double(r.n_pair) << '\n';
  }
  io::write_text_file(path, out.str());
}

}  // namespace pairsim::gaussian
