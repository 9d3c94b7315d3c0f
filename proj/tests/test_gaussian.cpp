#include "doctest.h"

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "pairsim/constants.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/gaussian.hpp"

using namespace pairsim;
using namespace pairsim::gaussian;

namespace {

ramps::FrequencyProfile constant_profile(double omega, double duration) {
  return ramps::FrequencyProfile(
      {0.0, 0.5 * duration, duration}, {omega, omega, omega},
      {{ramps::SegmentKind::Hold, 0.0, duration}});
}

ramps::FrequencyProfile quench_profile(double w0, double w1) {
  return ramps::build_step(w0, w1, 2.0e-7, 2.0e-7, 1.0e-11, 1.0e-9);
}

}  // namespace

TEST_CASE("vacuum stays stationary at constant frequency") {
  const double w0 = kTwoPi * 2.5e6;
  const auto prof = constant_profile(w0, 1.0e-5);
  const Trajectory traj = evolve(GaussianState::vacuum(w0), prof, {});
  for (const GaussianState& s : traj.states) {
    CHECK(std::abs(s.cov(0, 0) - 0.5) < 1e-10);
    CHECK(std::abs(s.cov(1, 1) - 0.5) < 1e-10);
    CHECK(std::abs(s.cov(0, 1)) < 1e-10);
    CHECK(std::abs(s.mean(0)) < 1e-12);
    CHECK(std::abs(s.mean(1)) < 1e-12);
  }
}

TEST_CASE("sudden quench squeezes by half the log ratio") {
  const double w0 = kTwoPi * 2.5e6;
  const auto prof = quench_profile(w0, w0 / 5.0);
  const Trajectory traj = evolve(GaussianState::vacuum(w0), prof, {});
  const auto rows = physical_rows(traj);
  const double r_final = rows.back().r;
  CHECK(std::abs(r_final - 0.5 * std::log(5.0)) < 1e-6);
  CHECK(rows.back().n_pair == doctest::Approx(0.8).epsilon(1e-6));

  // Analytic sudden-quench Bogoliubov magnitude.
  const double beta_analytic =
      std::abs((w0 / 5.0 - w0) / (2.0 * std::sqrt(w0 * w0 / 5.0)));
  const BogoliubovCoeffs bog =
      bogoliubov(traj.transfers.back(), w0, traj.omega_inst.back());
  CHECK(std::abs(bog.beta) == doctest::Approx(beta_analytic).epsilon(1e-6));
  CHECK(bog.defect() < 1e-9);
}

TEST_CASE("displaced vacuum rotates rigidly at constant frequency") {
  const double w0 = kTwoPi * 1.0e6;
  const auto prof = constant_profile(w0, 2.0e-6);
  GaussianState init = GaussianState::vacuum(w0);
  init.mean << std::sqrt(2.0), 0.0;  // alpha = 1
  EvolveOptions opts;
  opts.output_times = {5.0e-7, 1.0e-6, 1.5e-6, 2.0e-6};
  const Trajectory traj = evolve(init, prof, {}, opts);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const std::complex<double> alpha = displacement(traj.states[k]);
    CHECK(std::abs(alpha) == doctest::Approx(1.0).epsilon(1e-9));
    const double expected = std::fmod(-w0 * traj.times[k], kTwoPi);
    const double got = std::arg(alpha);
    const double diff =
        std::remainder(got - expected, kTwoPi);
    CHECK(std::abs(diff) < 1e-7);
  }
}

TEST_CASE("drive displaces linearly and leaves covariance untouched") {
  const ramps::TrapCalibration cal = testutil::default_cal();
  const auto prof = ramps::build_pulse(testutil::fig2_pulse(cal), cal,
                                       testutil::default_grid(cal));
  Drive d1;
  d1.force_newton = 1.76e-21;
  d1.mass_kg = kMg25MassKg;
  Drive d2 = d1;
  d2.force_newton *= 2.0;
  EvolveOptions opts;
  opts.output_times = {prof.t_end()};
  const Trajectory t1 = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, d1, opts);
  const Trajectory t2 = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, d2, opts);
  const double a1 = std::abs(displacement(t1.states.back()));
  const double a2 = std::abs(displacement(t2.states.back()));
  REQUIRE(a1 > 1e-6);
  CHECK(a2 / a1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((t1.states.back().cov - t2.states.back().cov).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("purity and symplectic form conserved through the pulse") {
  const auto cal = testutil::default_cal();
  const auto prof = ramps::build_pulse(testutil::fig2_pulse(cal), cal,
                                       testutil::default_grid(cal));
  const Trajectory traj = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, {});
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    CHECK(std::abs(traj.states[k].cov.determinant() - 0.25) < 1e-9);
    CHECK(traj.transfers[k].symplectic_defect() < 1e-9);
  }
}

TEST_CASE("squeeze_params recovers canonical forms") {
  SUBCASE("pure squeezed covariance") {
    GaussianState s;
    s.omega_ref = 1.0e6;
    const double r = 0.7;
    s.cov << 0.5 * std::exp(-2 * r), 0.0, 0.0, 0.5 * std::exp(2 * r);
    const SqueezeParams p = squeeze_params(s);
    CHECK(p.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(p.theta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(p.n_th) < 1e-12);
  }
  SUBCASE("isotropic thermal covariance") {
    GaussianState s;
    s.omega_ref = 1.0e6;
    s.cov << 1.5, 0.0, 0.0, 1.5;
    const SqueezeParams p = squeeze_params(s);
    CHECK(p.r == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.n_th == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("rotated squeezed covariance recovers the minor-axis angle") {
    const double r = 0.4, th = 1.1;
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::Matrix2d diag;
    diag << 0.5 * std::exp(-2 * r), 0.0, 0.0, 0.5 * std::exp(2 * r);
    GaussianState s;
    s.omega_ref = 1.0e6;
    s.cov = rot * diag * rot.transpose();
    const SqueezeParams p = squeeze_params(s);
    CHECK(p.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(p.theta == doctest::Approx(th).epsilon(1e-9));
  }
}

TEST_CASE("pure-state arccosh formula agrees with the eigendecomposition") {
  const auto cal = testutil::default_cal();
  const auto prof = ramps::build_pulse(testutil::fig2_pulse(cal), cal,
                                       testutil::default_grid(cal));
  const Trajectory traj = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, {});
  for (std::size_t k = 0; k < traj.states.size(); k += 400) {
    const GaussianState phys = traj.states[k].rescaled(traj.omega_inst[k]);
    const double r_eig = squeeze_params(phys).r;
    const double tr = phys.cov(0, 0) + phys.cov(1, 1);
    const double r_acosh = 0.5 * std::acosh(std::max(1.0, tr));
    CHECK(std::abs(r_eig - r_acosh) < 1e-9);
  }
}

TEST_CASE("bogoliubov pair number matches squeeze parameter for vacuum") {
  const auto cal = testutil::default_cal();
  const auto prof = ramps::build_pulse(testutil::fig2_pulse(cal), cal,
                                       testutil::default_grid(cal));
  const Trajectory traj = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, {});
  const auto rows = physical_rows(traj);
  for (std::size_t k = 0; k < rows.size(); k += 200) {
    const double n_from_r = squeezed_phonons(rows[k].r);
    CHECK(std::abs(rows[k].n_pair - n_from_r) < 1e-8);
  }
}

TEST_CASE("adiabatic ramp creates almost no squeezing") {
  const auto cal = testutil::default_cal();
  const double grid = 1.0 / (50.0 * kTwoPi * 2.5e6);
  const auto prof = ramps::build_ramp(testutil::kUHigh, testutil::default_u_low(cal),
                                      100.0e-6, 2, cal, grid, 1e-6, 1e-6);
  const Trajectory traj = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, {});
  const auto rows = physical_rows(traj);
  CHECK(rows.back().r < 0.01);
}

TEST_CASE("sudden limit approached monotonically in ramp duration") {
  const auto cal = testutil::default_cal();
  const double u_low = testutil::default_u_low(cal);
  double prev_r = -1.0;
  for (double t_ramp : {1.0e-6, 1.0e-7, 1.0e-8, 1.0e-9}) {
    const double grid = std::min(testutil::default_grid(cal), t_ramp / 64.0);
    const auto prof = ramps::build_ramp(testutil::kUHigh, u_low, t_ramp, 2, cal,
                                        grid, 1e-7, 1e-7);
    const Trajectory traj = evolve(GaussianState::vacuum(prof.omega_at(0.0)), prof, {});
    const double r = physical_rows(traj).back().r;
    CHECK(r > prev_r);
    prev_r = r;
  }
  CHECK(prev_r == doctest::Approx(0.5 * std::log(5.0)).epsilon(0.02));
}

TEST_CASE("rescaling is an involution and preserves purity") {
  GaussianState s;
  s.omega_ref = kTwoPi * 2.5e6;
  s.mean << 0.7, -0.3;
  s.cov << 0.9, 0.2, 0.2, 0.5;
  const GaussianState t = s.rescaled(kTwoPi * 0.5e6);
  CHECK(std::abs(t.cov.determinant() - s.cov.determinant()) < 1e-15);
  const GaussianState back = t.rescaled(s.omega_ref);
  CHECK((back.cov - s.cov).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.mean - s.mean).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("squeezing_db follows the 20/ln10 slope") {
  CHECK(squeezing_db(0.0) == doctest::Approx(0.0));
  CHECK(squeezing_db(0.54) == doctest::Approx(8.685889638065035 * 0.54).epsilon(1e-12));
  CHECK(squeezing_db(0.83) == doctest::Approx(8.685889638065035 * 0.83).epsilon(1e-12));
  CHECK_THROWS_AS(squeezing_db(-0.1), ConfigError);
}

TEST_CASE("evolve rejects mismatched reference frequency") {
  const double w0 = kTwoPi * 1.0e6;
  const auto prof = constant_profile(w0, 1.0e-6);
  CHECK_THROWS_AS(evolve(GaussianState::vacuum(2.0 * w0), prof, {}), ConfigError);
}

TEST_CASE("bogoliubov rejects non-symplectic transfers") {
  TransferMatrix tm;
  tm.omega_ref = 1.0e6;
  tm.s << 1.1, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(bogoliubov(tm, 1.0e6, 1.0e6), NumericalError);
}

TEST_CASE("identity transfer gives trivial Bogoliubov pair") {
  TransferMatrix tm;
  tm.omega_ref = 1.0e6;
  const BogoliubovCoeffs bog = bogoliubov(tm, 1.0e6, 1.0e6);
  CHECK(std::abs(bog.alpha - std::complex<double>(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(bog.beta) < 1e-15);
  CHECK(bog.n_pair() == doctest::Approx(0.0));
}

TEST_CASE("thermal state keeps its occupation under rescale-free evolution") {
  const double w0 = kTwoPi * 1.0e6;
  const auto prof = constant_profile(w0, 3.0e-6);
  const Trajectory traj = evolve(GaussianState::thermal(0.5, w0), prof, {});
  CHECK(mean_phonons(traj.states.back()) == doctest::Approx(0.5).epsilon(1e-9));
}
