#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "pairsim/fock.hpp"

namespace pairsim::tomography {

enum class Sideband { Red, Blue };

std::string to_string(Sideband s);

/// One sideband-flopping record. rabi0 and eta describe the drive used and
/// seed the joint-scale fit; shots == 0 marks a noiseless (analytic) signal.
struct SidebandSignal {
  Sideband kind = Sideband::Blue;
  std::vector<double> times;   ///< s
  std::vector<double> p_down;  ///< measured qubit-in-|down> probability
  int shots = 0;
  double rabi0 = 0.0;          ///< rad/s carrier Rabi frequency
  double eta = 0.0;            ///< Lamb-Dicke parameter
  double gamma = 0.0;          ///< 1/s contrast decay used when simulating
};

/// p_down(t) = 1/2 [1 + sum_n P_n cos(Omega_n t) e^{-gamma t}] with
/// Omega_n = rabi0 eta sqrt(n+1) (blue) or rabi0 eta sqrt(n) (red).
double sideband_p_down(const fock::PhononDistribution& dist, Sideband kind,
                       double rabi0, double eta, double gamma, double t);

/// Synthesizes a flopping record; shots > 0 adds binomial projection noise
/// (deterministic in seed), shots == 0 returns the noiseless curve.
SidebandSignal simulate_sideband(const fock::PhononDistribution& dist,
                                 Sideband kind, double rabi0, double eta,
                                 double gamma,
                                 const std::vector<double>& times, int shots,
                                 std::uint64_t seed);

struct ReconstructOptions {
  int n_max = 8;
  bool fit_scale = true;    ///< fit rabi0*eta jointly; else freeze metadata
  bool fit_gamma = true;
  double gamma_init = -1.0; ///< <0: take from the first signal
  double sigma_floor = 5.0e-3;  ///< weight floor for sampled signals
};

struct ReconstructResult {
  fock::PhononDistribution dist;  ///< with per-bin sigma
  double scale = 0.0;             ///< fitted rabi0*eta
  double gamma = 0.0;
  double chi2_reduced = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Joint weighted least squares over all signals for {P_n, scale, gamma}
/// with P_n >= 0, sum P_n = 1 enforced exactly through a softmax
/// parametrization. Warns when only red-sideband data is supplied and the
/// signal is vacuum-dominated (P_0 is then nearly unconstrained).
ReconstructResult reconstruct_pn(const std::vector<SidebandSignal>& signals,
                                 const ReconstructOptions& opts = {});

struct ParamFitOptions {
  double n_bar_th = 0.03;
  bool fit_n_bar = false;   ///< default: freeze at n_bar_th
  int n_max_model = 64;     ///< truncation for the model state
  int theta_starts = 8;
  bool alpha_nonneg = true; ///< gauge: alpha real >= 0, theta relative
};

struct FitResult {
  double r = 0.0;
  double r_sigma = 0.0;
  double theta = 0.0;       ///< relative angle between squeeze axis and alpha
  double theta_sigma = 0.0;
  double abs_alpha = 0.0;
  double abs_alpha_sigma = 0.0;
  double n_bar_th = 0.0;
  double n_bar_th_sigma = 0.0;  ///< 0 when frozen
  double chi2_reduced = 0.0;
  bool converged = false;
};

/// Fits the squeezed-displaced-thermal model S(re^{i theta}) D(alpha)
/// rho_th(n_bar) to a measured distribution (weighted by dist.sigma when
/// present). Model populations are renormalized over the fit window so the
/// comparison matches a sum-one reconstructed distribution. Multi-start in
/// theta; only the relative angle is identifiable from populations.
FitResult fit_parametrized(const fock::PhononDistribution& dist,
                           const ParamFitOptions& opts = {});

std::string fit_result_to_json(const FitResult& fit);

void write_signal_csv(const std::string& path, const SidebandSignal& signal);
SidebandSignal read_signal_csv(const std::string& path);

}  // namespace pairsim::tomography
