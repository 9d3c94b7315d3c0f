#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pairsim/ramps.hpp"

namespace pairsim::gaussian {

/// Single-mode Gaussian state in dimensionless quadratures X = x sqrt(m
/// omega_ref / hbar), P = p / sqrt(m hbar omega_ref). Vacuum covariance is
/// diag(1/2, 1/2); [X, P] = i.
struct GaussianState {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity() * 0.5;
  double omega_ref = 0.0;  ///< rad/s reference for the quadrature scaling

  static GaussianState vacuum(double omega_ref);
  static GaussianState thermal(double n_bar, double omega_ref);

  /// Same physical state expressed at a different reference frequency.
  GaussianState rescaled(double new_omega_ref) const;

  double purity() const;

  /// Throws NumericalError on asymmetric covariance or an uncertainty
  /// product below the Heisenberg floor (tolerance 1e-9).
  void validate() const;
};

/// Linear phase-space map (X,P) -> s*(X,P) + d accumulated by evolve().
struct TransferMatrix {
  Eigen::Matrix2d s = Eigen::Matrix2d::Identity();
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  double omega_ref = 0.0;

  GaussianState apply(const GaussianState& in) const;
  /// |det s - 1|, the symplectic defect.
  double symplectic_defect() const;
};

/// External force on the ion: F(t) = force_newton * shape(t).
struct Drive {
  double force_newton = 0.0;
  double mass_kg = 0.0;
  std::function<double(double)> shape;  ///< default: constant 1
};

struct EvolveOptions {
  double rel_tol = 1.0e-12;
  double abs_tol = 1.0e-14;
  /// Output sample times; empty = profile grid.
  std::vector<double> output_times;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> omega_inst;        ///< profile frequency at each time
  std::vector<TransferMatrix> transfers; ///< map from t0 to each time
  std::vector<GaussianState> states;     ///< at omega_ref = omega(t0)
  GaussianState initial;
};

/// Integrates the quadrature equations of motion dX/dt = omega_ref P,
/// dP/dt = -(omega(t)^2/omega_ref) X - sqrt(2) f(t) with f = F(t) x0/hbar,
/// propagating the fundamental solution, so one run serves any initial
/// Gaussian state. The initial state's omega_ref must equal omega(t0).
Trajectory evolve(const GaussianState& initial,
                  const ramps::FrequencyProfile& profile, const Drive& drive,
                  const EvolveOptions& opts = {});

struct SqueezeParams {
  double r = 0.0;      ///< squeezing parameter, >= 0
  double theta = 0.0;  ///< squeezed-quadrature angle in [0, pi)
  double n_th = 0.0;   ///< thermal occupation of the symmetric part
};

/// Decomposes a covariance matrix into thermal occupation and squeezing:
/// eigenvalues sigma_{+,-} give n_th = sqrt(sigma_+ sigma_-) - 1/2 and
/// r = (1/4) ln(sigma_+ / sigma_-); theta is the minor-axis angle.
SqueezeParams squeeze_params(const GaussianState& state);

/// Coherent displacement alpha = (⟨X⟩ + i⟨P⟩)/sqrt(2).
std::complex<double> displacement(const GaussianState& state);

/// Mean phonon number relative to the state's own reference frequency.
double mean_phonons(const GaussianState& state);

struct BogoliubovCoeffs {
  std::complex<double> alpha{1.0, 0.0};
  std::complex<double> beta{0.0, 0.0};

  double n_pair() const { return std::norm(beta); }
  /// ||alpha|^2 - |beta|^2 - 1|
  double defect() const { return std::abs(std::norm(alpha) - std::norm(beta) - 1.0); }
};

/// Bogoliubov coefficients connecting the omega_in vacuum mode evolved by
/// the transfer matrix to the omega_out ladder basis. Throws NumericalError
/// if the transfer is not symplectic to 1e-9.
BogoliubovCoeffs bogoliubov(const TransferMatrix& tm, double omega_in,
                            double omega_out);

/// Squeezing in decibels: 10 log10 of the variance suppression e^{-2r}.
double squeezing_db(double r);

/// sinh^2(r), the mean phonons added by pure squeezing.
double squeezed_phonons(double r);

struct TrajectoryRow {
  double t = 0.0;
  double mean_x = 0.0;
  double mean_p = 0.0;
  double cov_xx = 0.0;
  double cov_xp = 0.0;
  double cov_pp = 0.0;
  double r = 0.0;
  double abs_alpha = 0.0;
  double n_pair = 0.0;
};

/// Physical per-time readout: states re-referenced to the instantaneous
/// frequency before extracting r, |alpha| and the pair number.
std::vector<TrajectoryRow> physical_rows(const Trajectory& traj);

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows);

}  // namespace pairsim::gaussian
