#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "pairsim/constants.hpp"
#include "pairsim/entangle.hpp"
#include "pairsim/errors.hpp"

using namespace pairsim;
using namespace pairsim::entangle;

namespace {

/// Bisection oracle for the frequency ratio R >= 1 with kappa_of(R, 1) = k.
double ratio_oracle(double k) {
  double lo = 1.0, hi = 1.0e8;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kappa_of(mid, 1.0) < k ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TwoModeSpec experimental_spec(double r) {
  const double ratio = ratio_of_kappa(0.5008);
  TwoModeSpec spec;
  spec.omega_minus = kTwoPi * 2.5e6;
  spec.omega_plus = spec.omega_minus * ratio;
  spec.n_plus = 0.03;
  spec.n_minus = 0.03;
  spec.r = r;
  return spec;
}

}  // namespace

TEST_CASE("kappa is 1/2 at equal frequencies and grows with the ratio") {
  CHECK(kappa_of(1.7e6, 1.7e6) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kappa_of(4.0, 1.0) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(kappa_of(1.0, 4.0) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK_THROWS_AS(kappa_of(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(kappa_of(1.0, -2.0), ConfigError);
}

TEST_CASE("ratio_of_kappa inverts kappa_of") {
  for (double k : {0.5, 0.5008, 0.52, 0.625, 1.0, 2.5}) {
    const double ratio = ratio_of_kappa(k);
    CHECK(ratio == doctest::Approx(ratio_oracle(k)).epsilon(1e-9));
    CHECK(kappa_of(ratio, 1.0) == doctest::Approx(k).epsilon(1e-12));
  }
  CHECK(ratio_of_kappa(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(ratio_of_kappa(0.49), ConfigError);
}

TEST_CASE("the coupled ground state at kappa = 1/2 is a product state") {
  const SchmidtVacuum sv = schmidt_vacuum(0.5);
  REQUIRE(sv.c.size() == 1);
  CHECK(sv.c[0] == 1.0);
  CHECK(std::isinf(sv.beta));
}

TEST_CASE("Schmidt amplitudes form the stated geometric series") {
  const SchmidtVacuum sv = schmidt_vacuum(0.5008);
  const double eb = std::sqrt(0.0008 / 1.0008);
  CHECK(std::exp(-sv.beta) == doctest::Approx(eb).epsilon(1e-12));
  CHECK(eb == doctest::Approx(0.02827).epsilon(1e-3));
  REQUIRE(sv.c.size() >= 3);
  CHECK(sv.c[1] / sv.c[0] == doctest::Approx(eb).epsilon(1e-12));
  const double q = sv.c[1] * sv.c[1] / (sv.c[0] * sv.c[0]);
  CHECK(q == doctest::Approx(7.9936e-4).epsilon(1e-3));
}

TEST_CASE("Schmidt amplitudes are normalized across the kappa range") {
  for (double k : {0.5, 0.5008, 0.7, 1.5, 4.0, 10.0}) {
    const SchmidtVacuum sv = schmidt_vacuum(k);
    double sum = 0.0;
    for (double c : sv.c) sum += c * c;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(schmidt_vacuum(0.4999), ConfigError);
  CHECK_THROWS_AS(schmidt_vacuum(5.0e3), NumericalError);
}

TEST_CASE("perturbative pair amplitudes match the first-order expansion") {
  const auto zero = perturbative_pair_state(0.0);
  CHECK(std::abs(zero.normal_02) == 0.0);
  CHECK(std::abs(zero.local_11) == 0.0);

  const auto amp = perturbative_pair_state(0.1);
  CHECK(amp.local_11.real() == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(amp.local_02.real() == doctest::Approx(-0.0353553).epsilon(1e-6));
  CHECK(amp.local_20 == amp.local_02);

  // change of basis preserves the first-order excitation norm
  const std::complex<double> xi{0.07, -0.04};
  const auto c = perturbative_pair_state(xi);
  const double local = std::norm(c.local_11) + std::norm(c.local_02) +
                       std::norm(c.local_20);
  CHECK(local == doctest::Approx(std::norm(c.normal_02)).epsilon(1e-12));
  CHECK(local == doctest::Approx(0.5 * std::norm(xi)).epsilon(1e-12));
}

TEST_CASE("symplectic eigenvalues of the uncoupled pure vacuum are 1/2") {
  TwoModeSpec spec;
  spec.omega_minus = 1.0e6;
  spec.omega_plus = 1.0e6 * (1.0 + 1.0e-12);
  const auto [l1, l2] = symplectic_eigs(spec);
  CHECK(l1 == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(l2 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("the symplectic-eigenvalue product does not depend on squeezing") {
  for (double r : {0.0, 0.3, 0.83, 2.0}) {
    TwoModeSpec spec = experimental_spec(r);
    spec.n_plus = 0.11;
    spec.n_minus = 0.04;
    const auto [l1, l2] = symplectic_eigs(spec);
    const double expected = (1.0 + 2.0 * 0.04) * (1.0 + 2.0 * 0.11) / 4.0;
    CHECK(l1 * l2 == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("large squeezing sends lambda1 to zero and lambda2 to infinity") {
  const auto [l1_lo, l2_lo] = symplectic_eigs(experimental_spec(1.0));
  const auto [l1_hi, l2_hi] = symplectic_eigs(experimental_spec(12.0));
  CHECK(l1_hi < 1e-4 * l1_lo);
  CHECK(l2_hi > 1e4 * l2_lo);
}

TEST_CASE("TwoModeSpec validation") {
  TwoModeSpec spec;
  spec.omega_plus = 1.0e6;
  spec.omega_minus = 2.0e6;  // inverted order
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.omega_minus = 0.5e6;
  spec.r = -0.1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.r = 0.1;
  spec.n_plus = -1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("entanglement of formation vanishes at and above the threshold") {
  CHECK(entanglement_of_formation(0.5) == 0.0);
  CHECK(entanglement_of_formation(0.500855) == 0.0);
  CHECK(entanglement_of_formation(3.0) == 0.0);
  CHECK_THROWS_AS(entanglement_of_formation(0.0), ConfigError);
  CHECK_THROWS_AS(entanglement_of_formation(-0.2), ConfigError);
}

TEST_CASE("entanglement of formation decreases monotonically in chi") {
  double prev = entanglement_of_formation(1.0e-4);
  for (int i = 1; i <= 200; ++i) {
    const double chi = 1.0e-4 + (0.5 - 1.0e-4) * i / 200.0;
    const double ef = entanglement_of_formation(chi);
    CHECK(ef < prev);
    CHECK(ef >= 0.0);
    prev = ef;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("E_F of the pure unsqueezed ground state is the von Neumann "
          "entropy of the Schmidt decomposition") {
  for (double ratio : {1.05, 1.1198, 1.5, 3.0}) {
    TwoModeSpec spec;
    spec.omega_minus = 1.0e6;
    spec.omega_plus = ratio * 1.0e6;
    const double chi = chi_of(spec);
    const SchmidtVacuum sv = schmidt_vacuum(kappa_of(spec.omega_plus,
                                                     spec.omega_minus));
    double svn = 0.0;
    for (double c : sv.c)
      if (c > 0.0) svn -= c * c * std::log(c * c);
    CHECK(entanglement_of_formation(chi) ==
          doctest::Approx(svn).epsilon(1e-6));
  }
}

TEST_CASE("experimental two-mode anchors") {
  // ratio implied by kappa = 0.5008
  CHECK(ratio_of_kappa(0.5008) == doctest::Approx(1.1198).epsilon(1e-3));

  // unsqueezed thermal state sits just on the separable side; the raw
  // formula value there is the quoted ~1e-5
  const double chi0 = chi_of(experimental_spec(0.0));
  CHECK(chi0 > 0.5);
  CHECK(chi0 == doctest::Approx(0.500855).epsilon(1e-4));
  CHECK(entanglement_of_formation(chi0) == 0.0);
  const double raw = entanglement_of_formation_formula(chi0);
  CHECK(raw > 0.3e-5);
  CHECK(raw < 3.0e-5);

  // squeezing to r = 0.83 entangles the ions
  const double chi1 = chi_of(experimental_spec(0.83));
  CHECK(chi1 < 0.5);
  CHECK(entanglement_of_formation(chi1) ==
        doctest::Approx(0.4107).epsilon(2e-3));
  CHECK(nats_to_bits(entanglement_of_formation(chi1)) ==
        doctest::Approx(0.4107 / std::log(2.0)).epsilon(2e-3));
}
