#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace pairsim::entangle {

/// The two radial modes of the two-ion crystal: thermal occupancies plus
/// squeezing applied to the out-of-phase (rocking) mode.
struct TwoModeSpec {
  double omega_plus = 0.0;   ///< rad/s, in-phase mode
  double omega_minus = 0.0;  ///< rad/s, out-of-phase (rocking) mode
  double n_plus = 0.0;       ///< thermal occupancy of the in-phase mode
  double n_minus = 0.0;      ///< thermal occupancy of the rocking mode
  double r = 0.0;            ///< squeezing of the rocking mode

  /// Throws ConfigError unless omega_plus > omega_minus > 0 and the
  /// occupancies and r are nonnegative.
  void validate() const;
};

/// kappa = (sqrt(w+/w-) + sqrt(w-/w+)) / 4; minimum 1/2 at equal
/// frequencies. Throws ConfigError on nonpositive frequencies.
double kappa_of(double omega_plus, double omega_minus);

/// Inverse of kappa_of: the frequency ratio omega_plus/omega_minus >= 1
/// giving this kappa. Throws ConfigError for kappa < 1/2.
double ratio_of_kappa(double kappa);

/// Schmidt decomposition of the coupled ground state over local number
/// pairs |n>_A |n>_B: c_n = sqrt(1 - e^{-2 beta}) e^{-beta n}.
struct SchmidtVacuum {
  double kappa = 0.5;
  double beta = 0.0;      ///< e^{-beta} = sqrt((kappa-1/2)/(kappa+1/2))
  std::vector<double> c;  ///< amplitudes, c[0] first
};

/// n_terms < 0 sizes the table until the missing tail of sum c_n^2 drops
/// below 1e-14. Throws ConfigError for kappa < 1/2, NumericalError when an
/// adaptive table would be absurdly long (kappa ~ 1e3 or more).
SchmidtVacuum schmidt_vacuum(double kappa, int n_terms = -1);

/// First-order amplitudes of the squeezed rocking-mode vacuum, in the
/// normal-mode basis |n>_+ |m>_- and the local (per-ion) basis |n>_A |m>_B.
struct PairAmplitudes {
  std::complex<double> normal_00{1.0, 0.0};
  std::complex<double> normal_02;  ///< xi / sqrt(2)
  std::complex<double> local_00{1.0, 0.0};
  std::complex<double> local_11;  ///< -xi / 2
  std::complex<double> local_02;  ///< -xi / sqrt(8)
  std::complex<double> local_20;  ///< -xi / sqrt(8)
};

PairAmplitudes perturbative_pair_state(std::complex<double> xi);

/// The two symplectic eigenvalues of the reduced two-ion Gaussian state;
/// their product (1+2 n_minus)(1+2 n_plus)/4 is squeezing-independent.
std::pair<double, double> symplectic_eigs(const TwoModeSpec& spec);

/// min(lambda1, lambda2), which decides separability against 1/2.
double chi_of(const TwoModeSpec& spec);

/// Entanglement of formation in nats as a function of chi, clamped to 0 for
/// chi >= 1/2 (separable). Throws ConfigError for chi <= 0.
double entanglement_of_formation(double chi);

/// The unclamped closed form. Just above chi = 1/2 it returns small
/// spurious positive values; physical use goes through
/// entanglement_of_formation.
double entanglement_of_formation_formula(double chi);

double nats_to_bits(double nats);

}  // namespace pairsim::entangle
