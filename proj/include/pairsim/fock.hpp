#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pairsim/fock_kernels.hpp"
#include "pairsim/gaussian.hpp"
#include "pairsim/ramps.hpp"

namespace pairsim::fock {

/// Number-basis density matrix, truncated at n_max phonons.
struct FockState {
  CMat rho;
  double omega_ref = 0.0;

  int n_max() const { return static_cast<int>(rho.rows()) - 1; }

  double trace_defect() const;          ///< |tr rho - 1|
  double hermiticity_defect() const;    ///< max |rho - rho^dagger|
  /// Population above 0.8 * n_max, the truncation-leak sentinel.
  double tail_population() const;

  /// Throws NumericalError if any defect exceeds its tolerance
  /// (trace/hermiticity 1e-9, tail leak_threshold).
  void validate(double leak_threshold = 1.0e-8) const;
};

struct PhononDistribution {
  std::vector<double> p;
  std::vector<double> sigma;  ///< empty when no uncertainties available

  int n_max() const { return static_cast<int>(p.size()) - 1; }
};

FockState make_vacuum(int n_max, double omega_ref);
/// Thermal state; throws NumericalError if the truncated tail mass
/// (n_bar/(1+n_bar))^(n_max+1) exceeds leak_threshold.
FockState make_thermal(double n_bar, int n_max, double omega_ref,
                       double leak_threshold = 1.0e-8);

/// rho -> D(alpha) rho D(alpha)^dagger with D = exp(alpha a^dag - conj(alpha) a).
FockState displace(const FockState& state, Cplx alpha);
/// rho -> S(xi) rho S(xi)^dagger with S = exp((conj(xi) a^2 - xi a^dag^2)/2).
FockState squeeze(const FockState& state, Cplx xi);

/// S(r e^{i theta}) D(alpha) rho_thermal(n_bar) D^dag S^dag.
FockState squeezed_displaced_thermal(double r, double theta, Cplx alpha,
                                     double n_bar, int n_max,
                                     double omega_ref);

/// Diagonal populations. Entries in [-1e-10, 0) clamp to 0; anything lower
/// throws NumericalError.
PhononDistribution phonon_distribution(const FockState& state);

/// Expected n under the distribution.
double mean_n(const PhononDistribution& dist);

/// Ladder-operator moments; enough to compare against the Gaussian engine.
struct LadderMoments {
  Cplx a;        ///< <a>
  Cplx aa;       ///< <a^2>
  double n = 0;  ///< <a^dag a>

  double mean_x() const;
  double mean_p() const;
  double cov_xx() const;
  double cov_pp() const;
  double cov_xp() const;
};

LadderMoments moments(const FockState& state);

/// Squeeze-frame change of reference frequency: rho -> S(lambda) rho S^dag
/// with lambda = (1/2) ln(omega_ref / new_omega_ref); moments transform
/// like GaussianState::rescaled.
FockState frame_convert(const FockState& state, double new_omega_ref);

double fidelity_purity(const FockState& state);  ///< tr(rho^2)

struct FockEvolveOptions {
  double tol = 1.0e-9;            ///< per-step local error target
  double dt_init = 0.0;           ///< 0 = auto from the profile grid
  double unitarity_tol = 1.0e-8;  ///< final ||U^dag U - I||_max bound
  double leak_threshold = 1.0e-8;
  bool serial_kernels = false;
  std::vector<double> output_times;  ///< empty = ~400 uniform samples
};

struct FockTrajectory {
  std::vector<double> times;
  std::vector<double> omega_inst;
  std::vector<LadderMoments> moments;  ///< in the evolution's own frame
  FockState final_state;
  double unitarity_defect = 0.0;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
};

/// Number-basis propagation in the fixed omega_ref basis of the initial
/// state: H/hbar = (omega_ref/2)(w+1)(n+1/2) terms with w = omega(t)^2 /
/// omega_ref^2 off-diagonal pair terms and the linear drive. Commutator-free
/// fourth-order Magnus steps with adaptive step size; moments are directly
/// comparable to gaussian::evolve at the same omega_ref.
FockTrajectory evolve_fixed_basis(const FockState& initial,
                                  const ramps::FrequencyProfile& profile,
                                  const gaussian::Drive& drive,
                                  const FockEvolveOptions& opts = {});

/// Propagation of H/hbar = omega(t)(n+1/2) - (i/4) dln(omega)/dt (a^2 -
/// a^dag^2): the instantaneous-frame picture. Output moments and the final
/// state are referenced to omega(t_end).
FockTrajectory evolve_instantaneous_frame(const FockState& initial,
                                          const ramps::FrequencyProfile& profile,
                                          const FockEvolveOptions& opts = {});

void write_distribution_csv(const std::string& path,
                            const PhononDistribution& dist);
PhononDistribution read_distribution_csv(const std::string& path);

}  // namespace pairsim::fock
