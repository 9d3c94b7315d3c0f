#include "pairsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "pairsim/constants.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/io.hpp"
#include "pairsim/rng.hpp"

namespace pairsim::fock {

namespace {

constexpr Cplx kI(0.0, 1.0);

Eigen::VectorXd ladder_sqrt1(int dim) {
  Eigen::VectorXd v(std::max(0, dim - 1));
  for (int m = 0; m + 1 < dim; ++m) v[m] = std::sqrt(m + 1.0);
  return v;
}

Eigen::VectorXd ladder_sqrt2(int dim) {
  Eigen::VectorXd v(std::max(0, dim - 2));
  for (int m = 0; m + 2 < dim; ++m) v[m] = std::sqrt((m + 1.0) * (m + 2.0));
  return v;
}

}  // namespace

double FockState::trace_defect() const {
  return std::abs(rho.trace() - Cplx(1.0, 0.0));
}

double FockState::hermiticity_defect() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double FockState::tail_population() const {
  const int n = n_max();
  const int start = static_cast<int>(std::floor(0.8 * n)) + 1;
  double tail = 0.0;
  for (int m = start; m <= n; ++m) tail += std::max(0.0, rho(m, m).real());
  return tail;
}

void FockState::validate(double leak_threshold) const {
  if (rho.rows() < 1 || rho.rows() != rho.cols())
    throw NumericalError("density matrix must be square and non-empty");
  if (!(omega_ref > 0.0))
    throw NumericalError("reference frequency must be positive");
  if (trace_defect() > 1.0e-9)
    throw NumericalError("density matrix trace defect " +
                         io::format_double(trace_defect()));
  if (hermiticity_defect() > 1.0e-9)
    throw NumericalError("density matrix hermiticity defect " +
                         io::format_double(hermiticity_defect()));
  if (tail_population() > leak_threshold)
    throw NumericalError("population leaked into the truncation tail: " +
                         io::format_double(tail_population()));
}

FockState make_vacuum(int n_max, double omega_ref) {
  if (n_max < 0) throw ConfigError("n_max must be non-negative");
  if (!(omega_ref > 0.0)) throw ConfigError("omega_ref must be positive");
  FockState out;
  out.rho = CMat::Zero(n_max + 1, n_max + 1);
  out.rho(0, 0) = 1.0;
  out.omega_ref = omega_ref;
  return out;
}

FockState make_thermal(double n_bar, int n_max, double omega_ref,
                       double leak_threshold) {
  if (n_bar < 0.0) throw ConfigError("n_bar must be non-negative");
  FockState out = make_vacuum(n_max, omega_ref);
  if (n_bar == 0.0) return out;
  const double q = n_bar / (1.0 + n_bar);
  const double tail = std::pow(q, n_max + 1.0);
  if (tail > leak_threshold)
    throw NumericalError(
        "thermal occupation too hot for this truncation: tail mass " +
        io::format_double(tail));
  const double norm = 1.0 - tail;
  double w = 1.0 / (1.0 + n_bar);
  for (int m = 0; m <= n_max; ++m) {
    out.rho(m, m) = w / norm;
    w *= q;
  }
  return out;
}

namespace {

FockState conjugate_by_exp(const FockState& state, const CMat& generator) {
  const CMat u = generator.exp();
  FockState out;
  out.omega_ref = state.omega_ref;
  out.rho = u * state.rho * u.adjoint();
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  return out;
}

}  // namespace

FockState displace(const FockState& state, Cplx alpha) {
  const int dim = state.n_max() + 1;
  CMat g = CMat::Zero(dim, dim);
  const Eigen::VectorXd s1 = ladder_sqrt1(dim);
  for (int m = 0; m + 1 < dim; ++m) {
    g(m + 1, m) = alpha * s1[m];
    g(m, m + 1) = -std::conj(alpha) * s1[m];
  }
  return conjugate_by_exp(state, g);
}

FockState squeeze(const FockState& state, Cplx xi) {
  const int dim = state.n_max() + 1;
  CMat g = CMat::Zero(dim, dim);
  const Eigen::VectorXd s2 = ladder_sqrt2(dim);
  for (int m = 0; m + 2 < dim; ++m) {
    g(m, m + 2) = 0.5 * std::conj(xi) * s2[m];
    g(m + 2, m) = -0.5 * xi * s2[m];
  }
  return conjugate_by_exp(state, g);
}

FockState squeezed_displaced_thermal(double r, double theta, Cplx alpha,
                                     double n_bar, int n_max,
                                     double omega_ref) {
  FockState state = make_thermal(n_bar, n_max, omega_ref);
  if (std::abs(alpha) > 0.0) state = displace(state, alpha);
  if (r != 0.0) state = squeeze(state, r * std::exp(kI * theta));
  return state;
}

PhononDistribution phonon_distribution(const FockState& state) {
  PhononDistribution out;
  const int dim = state.n_max() + 1;
  out.p.resize(dim);
  for (int m = 0; m < dim; ++m) {
    double pm = state.rho(m, m).real();
    if (pm < 0.0) {
      if (pm < -1.0e-10)
        throw NumericalError("negative population p_" + std::to_string(m) +
                             " = " + io::format_double(pm));
      pm = 0.0;
    }
    out.p[m] = pm;
  }
  return out;
}

double mean_n(const PhononDistribution& dist) {
  double acc = 0.0;
  for (std::size_t m = 0; m < dist.p.size(); ++m)
    acc += static_cast<double>(m) * dist.p[m];
  return acc;
}

double LadderMoments::mean_x() const { return std::sqrt(2.0) * a.real(); }
double LadderMoments::mean_p() const { return std::sqrt(2.0) * a.imag(); }

double LadderMoments::cov_xx() const {
  return aa.real() + n + 0.5 - mean_x() * mean_x();
}

double LadderMoments::cov_pp() const {
  return -aa.real() + n + 0.5 - mean_p() * mean_p();
}

double LadderMoments::cov_xp() const {
  return aa.imag() - mean_x() * mean_p();
}

LadderMoments moments(const FockState& state) {
  const int dim = state.n_max() + 1;
  LadderMoments out;
  for (int m = 0; m + 1 < dim; ++m)
    out.a += std::sqrt(m + 1.0) * state.rho(m + 1, m);
  for (int m = 0; m + 2 < dim; ++m)
    out.aa += std::sqrt((m + 1.0) * (m + 2.0)) * state.rho(m + 2, m);
  for (int m = 0; m < dim; ++m) out.n += m * state.rho(m, m).real();
  return out;
}

FockState frame_convert(const FockState& state, double new_omega_ref) {
  if (!(new_omega_ref > 0.0))
    throw ConfigError("new reference frequency must be positive");
  if (new_omega_ref == state.omega_ref) return state;
  const double lambda = 0.5 * std::log(state.omega_ref / new_omega_ref);
  FockState out = squeeze(state, Cplx(lambda, 0.0));
  out.omega_ref = new_omega_ref;
  return out;
}

double fidelity_purity(const FockState& state) {
  return (state.rho * state.rho).trace().real();
}

namespace {

/// First and second Legendre moments, (1/h) int f dt and (12/h^2) int
/// (t - t_mid) f dt, of the profile quantities a commutator-free step needs.
/// Computed in closed form per linear profile piece, so grid kinks inside a
/// step cost no integration order.
struct StepMoments {
  double w_m0 = 0.0, w_m1 = 0.0;      ///< omega(t)
  double w2_m0 = 0.0, w2_m1 = 0.0;    ///< omega(t)^2
  double lk_m0 = 0.0, lk_m1 = 0.0;    ///< d(ln omega)/dt
};

class ProfileIntegrator {
 public:
  explicit ProfileIntegrator(const ramps::FrequencyProfile& p) : profile_(&p) {}

  StepMoments moments(double a, double b, bool with_log_derivative) {
    const auto& ts = profile_->times();
    const auto& om = profile_->omega();
    const double h = b - a;
    const double mid = 0.5 * (a + b);
    StepMoments out;

    if (hint_ + 1 >= ts.size()) hint_ = ts.size() - 2;
    while (hint_ > 0 && a < ts[hint_]) --hint_;
    while (hint_ + 2 < ts.size() && a >= ts[hint_ + 1]) ++hint_;

    double iw = 0.0, itw = 0.0, iw2 = 0.0, itw2 = 0.0;
    double ilk = 0.0, itlk = 0.0;
    std::size_t seg = hint_;
    double x0 = a;
    while (x0 < b) {
      while (seg + 2 < ts.size() && x0 >= ts[seg + 1]) ++seg;
      const double x1 = std::min(b, std::max(x0, ts[seg + 1]));
      if (!(x1 > x0)) break;
      const double wa = profile_->omega_at(x0);
      const double wb = profile_->omega_at(x1);
      const double dx = x1 - x0;
      const double s = (wb - wa) / dx;
      const double off = x0 - mid;
      // int omega and int (t-mid) omega
      const double piece_iw = dx * 0.5 * (wa + wb);
      iw += piece_iw;
      itw += off * piece_iw + wa * dx * dx / 2.0 + s * dx * dx * dx / 3.0;
      // int omega^2 and int (t-mid) omega^2
      const double piece_iw2 = dx * (wa * wa + wa * wb + wb * wb) / 3.0;
      iw2 += piece_iw2;
      itw2 += off * piece_iw2 + wa * wa * dx * dx / 2.0 +
              2.0 * wa * s * dx * dx * dx / 3.0 + s * s * dx * dx * dx * dx / 4.0;
      if (with_log_derivative) {
        // int kdot = ln(wb/wa) and int (t-mid) kdot = dx G(z) + off L with
        // z = (wb-wa)/wa, L = log1p(z), G = 1 - L/z; the relative forms stay
        // exact through flat pieces where absolute logs would cancel badly.
        const double z = (wb - wa) / wa;
        const double el = std::log1p(z);
        double g;
        if (std::abs(z) < 0.25) {
          g = 0.0;
          double zk = z;
          for (int k = 1; k < 40; ++k) {
            const double term = zk / (k + 1.0);
            g = (k % 2 == 1) ? g + term : g - term;
            zk *= z;
            if (std::abs(zk) < 1.0e-18 * (1.0 + std::abs(g))) break;
          }
        } else {
          g = 1.0 - el / z;
        }
        ilk += el;
        itlk += dx * g + off * el;
      }
      x0 = x1;
    }

    out.w_m0 = iw / h;
    out.w_m1 = 12.0 * itw / (h * h);
    out.w2_m0 = iw2 / h;
    out.w2_m1 = 12.0 * itw2 / (h * h);
    if (with_log_derivative) {
      out.lk_m0 = ilk / h;
      out.lk_m1 = 12.0 * itlk / (h * h);
    }
    return out;
  }

 private:
  const ramps::FrequencyProfile* profile_;
  std::size_t hint_ = 0;
};

struct GeneratorBuilder {
  const ramps::FrequencyProfile& profile;
  ProfileIntegrator integrator;
  int dim;
  Eigen::VectorXd s1, s2;
  bool instantaneous = false;
  double omega0 = 0.0;        ///< fixed-basis reference
  double drive_scale = 0.0;   ///< F0 / sqrt(m hbar omega0)
  const std::function<double(double)>* shape = nullptr;

  GeneratorBuilder(const ramps::FrequencyProfile& p, int dim_)
      : profile(p),
        integrator(p),
        dim(dim_),
        s1(ladder_sqrt1(dim_)),
        s2(ladder_sqrt2(dim_)) {}

  /// Builds the exponents of one fourth-order commutator-free step over
  /// [t, t+h] plus the midpoint-rule exponent used for error estimation:
  /// with m0/m1 the generator's Legendre moments, the two fourth-order
  /// exponents are h (m0/2 -+ m1/6) and the midpoint one is h m0.
  void build_step(double t, double h, PentaBands& e_first,
                  PentaBands& e_second, PentaBands& e_mid) {
    const StepMoments sm = integrator.moments(t, t + h, instantaneous);
    e_first.resize(dim);
    e_second.resize(dim);
    e_mid.resize(dim);

    double d_m0, d_m1;          ///< coefficient of (n + 1/2) on the diagonal
    double b_m0, b_m1;          ///< pair-band coefficient
    if (instantaneous) {
      d_m0 = sm.w_m0;
      d_m1 = sm.w_m1;
      b_m0 = 0.25 * sm.lk_m0;
      b_m1 = 0.25 * sm.lk_m1;
    } else {
      d_m0 = 0.5 * omega0 + 0.5 * sm.w2_m0 / omega0;
      d_m1 = 0.5 * sm.w2_m1 / omega0;
      b_m0 = 0.25 * (sm.w2_m0 / omega0 - omega0);
      b_m1 = 0.25 * sm.w2_m1 / omega0;
    }

    const auto diag_fill = [&](PentaBands& e, double c) {
      for (int m = 0; m < dim; ++m) e.d[m] = -kI * (c * (m + 0.5));
    };
    diag_fill(e_first, h * (0.5 * d_m0 - d_m1 / 6.0));
    diag_fill(e_second, h * (0.5 * d_m0 + d_m1 / 6.0));
    diag_fill(e_mid, h * d_m0);

    const auto pair_fill = [&](PentaBands& e, double c) {
      if (instantaneous) {
        for (int m = 0; m + 2 < dim; ++m) {
          e.u2[m] = -c * s2[m];
          e.l2[m] = c * s2[m];
        }
      } else {
        for (int m = 0; m + 2 < dim; ++m) {
          const Cplx v = -kI * (c * s2[m]);
          e.u2[m] = v;
          e.l2[m] = v;
        }
      }
    };
    pair_fill(e_first, h * (0.5 * b_m0 - b_m1 / 6.0));
    pair_fill(e_second, h * (0.5 * b_m0 + b_m1 / 6.0));
    pair_fill(e_mid, h * b_m0);

    if (drive_scale != 0.0) {
      const double sqrt3 = std::sqrt(3.0);
      double g1 = drive_scale, g2 = drive_scale;
      if (shape && *shape) {
        g1 *= (*shape)(t + (0.5 - sqrt3 / 6.0) * h);
        g2 *= (*shape)(t + (0.5 + sqrt3 / 6.0) * h);
      }
      const double g_m0 = 0.5 * (g1 + g2);
      const double g_m1 = sqrt3 * (g2 - g1);
      const auto drive_fill = [&](PentaBands& e, double c) {
        const double gx = c / std::sqrt(2.0);
        for (int m = 0; m + 1 < dim; ++m) {
          const Cplx v = -kI * (gx * s1[m]);
          e.u1[m] = v;
          e.l1[m] = v;
        }
      };
      drive_fill(e_first, h * (0.5 * g_m0 - g_m1 / 6.0));
      drive_fill(e_second, h * (0.5 * g_m0 + g_m1 / 6.0));
      drive_fill(e_mid, h * g_m0);
    }
  }
};

/// Three inner diagonals of U rho0 U^dagger, reduced to ladder moments.
LadderMoments propagated_moments(const CMat& u, const CMat& w) {
  const int dim = static_cast<int>(u.rows());
  LadderMoments out;
  // rho(t) = (U rho0) U^dag = W U^dag, so rho_t(m, k) = U.row(k).dot(W.row(m))
  // with Eigen's dot conjugating its first argument.
  for (int m = 0; m < dim; ++m) {
    const Cplx diag = u.row(m).dot(w.row(m));
    out.n += m * diag.real();
  }
  for (int m = 0; m + 1 < dim; ++m) {
    const Cplx s1 = u.row(m).dot(w.row(m + 1));
    out.a += std::sqrt(m + 1.0) * s1;
  }
  for (int m = 0; m + 2 < dim; ++m) {
    const Cplx s2 = u.row(m).dot(w.row(m + 2));
    out.aa += std::sqrt((m + 1.0) * (m + 2.0)) * s2;
  }
  return out;
}

FockTrajectory evolve_impl(const FockState& initial,
                           const ramps::FrequencyProfile& profile,
                           GeneratorBuilder& gen,
                           const FockEvolveOptions& opts) {
  initial.validate(opts.leak_threshold);
  if (!(opts.tol > 0.0)) throw ConfigError("evolution tolerance must be positive");
  const double t0 = profile.t_begin();
  const double t_end = profile.t_end();
  const double span = t_end - t0;
  if (!(span > 0.0)) throw ConfigError("profile must span a positive duration");

  std::vector<double> times = opts.output_times;
  if (times.empty()) {
    const std::size_t n = 401;
    times.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      times[i] = t0 + span * static_cast<double>(i) / static_cast<double>(n - 1);
    times.back() = t_end;
  } else {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < t0 - 1.0e-15 || times[i] > t_end + 1.0e-15)
        throw ConfigError("output time outside the profile window");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw ConfigError("output times must be strictly increasing");
    }
  }

  const int dim = initial.n_max() + 1;
  const double eps_t = 1.0e-12 * span;

  CMat u = CMat::Identity(dim, dim);
  bool rho_diag = true;
  for (int i = 0; i < dim && rho_diag; ++i)
    for (int j = 0; j < dim; ++j)
      if (i != j && std::abs(initial.rho(i, j)) > 1.0e-15) {
        rho_diag = false;
        break;
      }

  FockTrajectory traj;
  traj.times.reserve(times.size());
  traj.omega_inst.reserve(times.size());
  traj.moments.reserve(times.size());

  CMat w(dim, dim);
  auto record = [&](double t_rec) {
    if (rho_diag)
      w = u * initial.rho.diagonal().asDiagonal();
    else
      w = u * initial.rho;
    traj.times.push_back(t_rec);
    traj.omega_inst.push_back(profile.omega_at(t_rec));
    traj.moments.push_back(propagated_moments(u, w));
  };

  std::size_t oi = 0;
  while (oi < times.size() && times[oi] <= t0 + eps_t) {
    record(times[oi]);
    ++oi;
  }

  ExpmvOptions eopts;
  eopts.serial = opts.serial_kernels;

  double h = opts.dt_init > 0.0
                 ? opts.dt_init
                 : std::min(0.05 / profile.omega_max(), span / 16.0);
  const double h_floor = 1.0e-9 * span;

  // Deterministic probe vector for the CF4-vs-CF2 local error estimate.
  CMat probe(dim, 1);
  {
    SplitMix64 rng(0x9e3779b97f4a7c15ULL);
    for (int m = 0; m < dim; ++m)
      probe(m, 0) = Cplx(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
    probe /= probe.norm();
  }

  PentaBands e_first, e_second, e_mid;
  CMat v_cf4, v_cf2;
  double t = t0;
  while (t < t_end - eps_t) {
    double t_target = t_end;
    if (oi < times.size()) t_target = std::min(t_target, times[oi]);
    const bool clipped = t_target - t < h;
    double h_step = std::min(h, t_target - t);
    if (h_step < h_floor) h_step = std::min(h_floor, t_target - t);

    gen.build_step(t, h_step, e_first, e_second, e_mid);

    v_cf4 = probe;
    expmv_inplace(e_first, v_cf4, eopts);
    expmv_inplace(e_second, v_cf4, eopts);
    v_cf2 = probe;
    expmv_inplace(e_mid, v_cf2, eopts);
    const double err = (v_cf4 - v_cf2).norm();

    const bool accept = err <= opts.tol || h_step <= h_floor * 1.0001;
    if (accept) {
      expmv_inplace(e_first, u, eopts);
      expmv_inplace(e_second, u, eopts);
      t += h_step;
      ++traj.steps;
      if (oi < times.size() && std::abs(t - times[oi]) <= eps_t) {
        t = times[oi];
        record(t);
        ++oi;
      }
    } else {
      ++traj.rejected_steps;
    }

    // Step-size controller on the third-order error estimate; a step that
    // was only shortened to land on an output keeps the controller's h.
    if (!(accept && clipped)) {
      double factor = 4.0;
      if (err > 0.0)
        factor = std::clamp(0.9 * std::cbrt(opts.tol / err), 0.25, 4.0);
      h = std::max(h_step * factor, h_floor);
    }
    if (traj.steps + traj.rejected_steps > 2000000)
      throw NumericalError("evolution failed to reach the end of the profile");
  }
  while (oi < times.size()) {  // outputs at t_end within tolerance
    record(times[oi]);
    ++oi;
  }

  traj.unitarity_defect =
      (u.adjoint() * u - CMat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (traj.unitarity_defect > opts.unitarity_tol)
    throw NumericalError("propagator lost unitarity: defect " +
                         io::format_double(traj.unitarity_defect));

  if (rho_diag)
    w = u * initial.rho.diagonal().asDiagonal();
  else
    w = u * initial.rho;
  traj.final_state.rho = w * u.adjoint();
  traj.final_state.rho =
      0.5 * (traj.final_state.rho + traj.final_state.rho.adjoint()).eval();
  traj.final_state.omega_ref =
      gen.instantaneous ? profile.omega_at(t_end) : gen.omega0;
  traj.final_state.validate(opts.leak_threshold);
  return traj;
}

}  // namespace

FockTrajectory evolve_fixed_basis(const FockState& initial,
                                  const ramps::FrequencyProfile& profile,
                                  const gaussian::Drive& drive,
                                  const FockEvolveOptions& opts) {
  const double omega0 = profile.omega_at(profile.t_begin());
  if (std::abs(initial.omega_ref - omega0) > 1.0e-9 * omega0)
    throw ConfigError(
        "initial state must be referenced at the profile's initial frequency");
  if (drive.force_newton != 0.0 && !(drive.mass_kg > 0.0))
    throw ConfigError("drive with nonzero force requires a positive mass");

  GeneratorBuilder gen(profile, initial.n_max() + 1);
  gen.instantaneous = false;
  gen.omega0 = omega0;
  gen.drive_scale =
      drive.force_newton != 0.0
          ? drive.force_newton / std::sqrt(drive.mass_kg * kHbar * omega0)
          : 0.0;
  gen.shape = &drive.shape;
  return evolve_impl(initial, profile, gen, opts);
}

FockTrajectory evolve_instantaneous_frame(const FockState& initial,
                                          const ramps::FrequencyProfile& profile,
                                          const FockEvolveOptions& opts) {
  const double omega0 = profile.omega_at(profile.t_begin());
  if (std::abs(initial.omega_ref - omega0) > 1.0e-9 * omega0)
    throw ConfigError(
        "initial state must be referenced at the profile's initial frequency");
  GeneratorBuilder gen(profile, initial.n_max() + 1);
  gen.instantaneous = true;
  return evolve_impl(initial, profile, gen, opts);
}

void write_distribution_csv(const std::string& path,
                            const PhononDistribution& dist) {
  std::ostringstream os;
  const bool with_sigma = !dist.sigma.empty();
  os << (with_sigma ? "n,p,sigma\n" : "n,p\n");
  for (std::size_t m = 0; m < dist.p.size(); ++m) {
    os << m << ',' << io::format_double(dist.p[m]);
    if (with_sigma) os << ',' << io::format_double(dist.sigma[m]);
    os << '\n';
  }
  io::write_text_file(path, os.str());
}

PhononDistribution read_distribution_csv(const std::string& path) {
  const io::CsvTable table = io::read_csv(path);
  const bool with_sigma =
      table.header == std::vector<std::string>{"n", "p", "sigma"};
  if (!with_sigma && table.header != std::vector<std::string>{"n", "p"})
    throw IoError(path + ": unexpected distribution CSV header");
  PhononDistribution out;
  out.p.resize(table.rows.size());
  if (with_sigma) out.sigma.resize(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    try {
      if (std::stoul(row.at(0)) != i)
        throw IoError(path + ": phonon distribution rows must be 0..n_max");
      out.p[i] = std::stod(row.at(1));
      if (with_sigma) out.sigma[i] = std::stod(row.at(2));
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError(path + ": bad numeric value at row " + std::to_string(i + 2));
    }
  }
  if (out.p.empty()) throw IoError(path + ": empty distribution");
  return out;
}

}  // namespace pairsim::fock
