#include "pairsim/entangle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pairsim/errors.hpp"

namespace pairsim::entangle {

void TwoModeSpec::validate() const {
  if (!(omega_minus > 0.0) || !(omega_plus > omega_minus))
    throw ConfigError(
        "TwoModeSpec: need omega_plus > omega_minus > 0, got omega_plus=" +
        std::to_string(omega_plus) +
        " omega_minus=" + std::to_string(omega_minus));
  if (n_plus < 0.0 || n_minus < 0.0)
    throw ConfigError("TwoModeSpec: negative thermal occupancy");
  if (r < 0.0) throw ConfigError("TwoModeSpec: negative squeezing parameter");
}

double kappa_of(double omega_plus, double omega_minus) {
  if (!(omega_plus > 0.0) || !(omega_minus > 0.0))
    throw ConfigError("kappa_of: frequencies must be positive");
  const double s = std::sqrt(omega_plus / omega_minus);
  return 0.25 * (s + 1.0 / s);
}

double ratio_of_kappa(double kappa) {
  if (kappa < 0.5) throw ConfigError("ratio_of_kappa: kappa below 1/2");
  // kappa = (s + 1/s)/4 with s = sqrt(ratio) >= 1
  const double s = 2.0 * kappa + std::sqrt(4.0 * kappa * kappa - 1.0);
  return s * s;
}

SchmidtVacuum schmidt_vacuum(double kappa, int n_terms) {
  if (kappa < 0.5) throw ConfigError("schmidt_vacuum: kappa below 1/2");
  SchmidtVacuum out;
  out.kappa = kappa;
  const double e2b = (kappa - 0.5) / (kappa + 0.5);  // e^{-2 beta}
  out.beta = e2b > 0.0 ? -0.5 * std::log(e2b)
                       : std::numeric_limits<double>::infinity();

  int count = n_terms;
  if (count < 0) {
    if (e2b > 1.0 - 1.0e-3)
      throw NumericalError(
          "schmidt_vacuum: adaptive table unreasonably long at kappa = " +
          std::to_string(kappa));
    // remaining tail after n terms is e2b^n; ask for < 1e-14
    count = e2b > 0.0
                ? static_cast<int>(std::ceil(-14.0 * std::numbers::ln10 /
                                             std::log(e2b))) +
                      1
                : 1;
  }
  const double c0 = std::sqrt(1.0 - e2b);
  const double ratio = std::sqrt(e2b);
  out.c.resize(std::max(count, 1));
  double c = c0;
  for (double& cn : out.c) {
    cn = c;
    c *= ratio;
  }
  return out;
}

PairAmplitudes perturbative_pair_state(std::complex<double> xi) {
  PairAmplitudes out;
  out.normal_02 = xi / std::numbers::sqrt2;
  out.local_11 = -0.5 * xi;
  out.local_02 = -xi / std::sqrt(8.0);
  out.local_20 = -xi / std::sqrt(8.0);
  return out;
}

std::pair<double, double> symplectic_eigs(const TwoModeSpec& spec) {
  spec.validate();
  const double occ =
      std::sqrt(1.0 + 2.0 * spec.n_minus) * std::sqrt(1.0 + 2.0 * spec.n_plus);
  const double root = std::sqrt(spec.omega_plus / spec.omega_minus);
  const double lambda1 = std::exp(-spec.r) * occ * root / 2.0;
  const double lambda2 = std::exp(spec.r) * occ / (2.0 * root);
  return {lambda1, lambda2};
}

double chi_of(const TwoModeSpec& spec) {
  const auto [l1, l2] = symplectic_eigs(spec);
  return std::min(l1, l2);
}

double entanglement_of_formation_formula(double chi) {
  if (chi <= 0.0)
    throw ConfigError("entanglement_of_formation: chi must be positive");
  const double tp = (0.5 + chi) * (0.5 + chi) / (2.0 * chi);
  const double tm = (0.5 - chi) * (0.5 - chi) / (2.0 * chi);
  const double first = tp * std::log(tp);
  const double second = tm > 0.0 ? tm * std::log(tm) : 0.0;
  return first - second;
}

double entanglement_of_formation(double chi) {
  if (chi <= 0.0)
    throw ConfigError("entanglement_of_formation: chi must be positive");
  if (chi >= 0.5) return 0.0;
  return entanglement_of_formation_formula(chi);
}

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

}  // namespace pairsim::entangle
