#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "pairsim/constants.hpp"
#include "pairsim/cosmo.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/gaussian.hpp"
#include "pairsim/ramps.hpp"

using namespace pairsim;
using namespace pairsim::cosmo;

namespace {

ScenarioSpec de_sitter_spec(ScenarioKind kind, double hubble, double mass,
                            double mode_k) {
  ScenarioSpec spec;
  spec.kind = kind;
  spec.history = kind == ScenarioKind::FlrwConformal
                     ? History::de_sitter_conformal(hubble)
                     : History::de_sitter_proper(hubble);
  spec.mass = mass;
  spec.mode_k = mode_k;
  return spec;
}

/// Worst relative deviation between two compiled profiles sampled on a
/// common time grid (the grids themselves need not coincide).
double worst_rel_omega(const ramps::FrequencyProfile& lhs,
                       const ramps::FrequencyProfile& rhs, double t0,
                       double t1) {
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double t = t0 + (t1 - t0) * i / 400.0;
    worst = std::max(worst,
                     std::abs(lhs.omega_at(t) - rhs.omega_at(t)) /
                         rhs.omega_at(t));
  }
  return worst;
}

}  // namespace

TEST_CASE("scenario kind names round trip") {
  for (auto kind : {ScenarioKind::FlrwProper, ScenarioKind::FlrwConformal,
                    ScenarioKind::VectorField, ScenarioKind::SauterSchwinger,
                    ScenarioKind::Hawking})
    CHECK(scenario_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(scenario_kind_from_string("einstein_static"), ConfigError);
}

TEST_CASE("analytic histories differentiate exactly") {
  const double h = 1.0e-5;
  auto check_derivs = [&](const History& hist, double t) {
    const double d1_fd = (hist.value(t + h) - hist.value(t - h)) / (2.0 * h);
    const double d2_fd =
        (hist.value(t + h) - 2.0 * hist.value(t) + hist.value(t - h)) /
        (h * h);
    CHECK(hist.d1(t) == doctest::Approx(d1_fd).epsilon(1e-6));
    CHECK(hist.d2(t) == doctest::Approx(d2_fd).epsilon(1e-4));
  };
  check_derivs(History::de_sitter_proper(0.8), 0.7);
  check_derivs(History::de_sitter_conformal(1.3), -0.6);
  check_derivs(History::power_law(0.5, 2.0), 1.9);
  check_derivs(History::sauter_pulse(0.5, 2.0), 0.3);

  const History flat = History::constant(4.2);
  CHECK(flat.value(123.0) == 4.2);
  CHECK(flat.d1(-5.0) == 0.0);
  CHECK(flat.d2(0.0) == 0.0);

  CHECK_THROWS_AS(History::de_sitter_conformal(1.0).value(0.5), ConfigError);
  CHECK_THROWS_AS(History::power_law(2.0, 1.0).value(-0.1), ConfigError);
  CHECK_THROWS_AS(History::de_sitter_proper(-1.0), ConfigError);
  CHECK_THROWS_AS(History().value(0.0), ConfigError);
  CHECK(History().empty());
}

TEST_CASE("sauter pulse electric field peaks at e0") {
  const double e0 = 0.7, w0 = 3.0;
  const History a = History::sauter_pulse(e0, w0);
  // E = -dA/dt = e0 sech^2(w0 t)
  CHECK(-a.d1(0.0) == doctest::Approx(e0).epsilon(1e-15));
  const double c = std::cosh(w0 * 0.4);
  CHECK(-a.d1(0.4) == doctest::Approx(e0 / (c * c)).epsilon(1e-13));
  CHECK(a.value(50.0) == doctest::Approx(-e0 / w0).epsilon(1e-12));
}

TEST_CASE("sampled histories reproduce analytic derivatives") {
  const double hub = 0.8;
  std::vector<double> ts(2001), as(2001);
  for (int i = 0; i <= 2000; ++i) {
    ts[i] = 2.0 * i / 2000.0;
    as[i] = std::exp(hub * ts[i]);
  }
  const History hist = History::from_samples(ts, as, 7);
  for (double t : {0.1, 0.9, 1.7}) {
    const double a = std::exp(hub * t);
    CHECK(hist.value(t) == doctest::Approx(a).epsilon(1e-8));
    CHECK(hist.d1(t) == doctest::Approx(hub * a).epsilon(1e-6));
    CHECK(hist.d2(t) == doctest::Approx(hub * hub * a).epsilon(1e-5));
  }
  CHECK_THROWS_AS(hist.value(2.5), ConfigError);
  CHECK_THROWS_AS(hist.value(-0.1), ConfigError);

  CHECK_THROWS_AS(History::from_samples({0.0, 1.0}, {1.0, 1.0}, 7),
                  ConfigError);
  CHECK_THROWS_AS(History::from_samples(ts, {1.0, 2.0}, 7), ConfigError);
  CHECK_THROWS_AS(History::from_samples(ts, as, 6), ConfigError);
  CHECK_THROWS_AS(History::from_samples(ts, as, 3), ConfigError);
  std::vector<double> warped = ts;
  warped[1000] += 0.2e-3;
  CHECK_THROWS_AS(History::from_samples(warped, as, 7), ConfigError);
}

TEST_CASE("smoothing rescues noisy sampled histories") {
  const double hub = 0.8, m = 2.5, k = 1.0;
  std::vector<double> ts(2001), clean(2001), noisy(2001);
  for (int i = 0; i <= 2000; ++i) {
    ts[i] = 2.0 * i / 2000.0;
    clean[i] = std::exp(hub * ts[i]);
    noisy[i] = clean[i] * (1.0 + 2.0e-6 * std::sin(12345.6789 * i));
  }
  ScenarioSpec spec;
  spec.kind = ScenarioKind::FlrwProper;
  spec.mass = m;
  spec.mode_k = k;
  spec.history = History::de_sitter_proper(hub);
  const auto reference = compile(spec, 0.05, 1.95);

  auto deviation = [&](const std::vector<double>& samples, int window) {
    ScenarioSpec s = spec;
    s.history = History::from_samples(ts, samples, window);
    return worst_rel_omega(compile(s, 0.05, 1.95), reference, 0.05, 1.95);
  };

  CHECK(deviation(clean, 7) < 1.0e-6);
  const double raw = deviation(noisy, 1);
  const double mild = deviation(noisy, 7);
  const double strong = deviation(noisy, 21);
  CHECK(strong < mild);
  CHECK(mild < raw);
  CHECK(strong < 0.05);
}

TEST_CASE("unit scale factor compiles to a static mode") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::VectorField;
  spec.history = History::constant(1.0);
  spec.mass = 1.3;
  spec.mode_k = 0.7;
  const auto prof = compile(spec, 0.0, 5.0);
  const double expected = std::hypot(1.3, 0.7);
  for (double w : prof.omega())
    CHECK(w == doctest::Approx(expected).epsilon(1e-15));
  CHECK(prof.segments().size() == 1);
  CHECK(prof.segments().front().kind == ramps::SegmentKind::Hold);
}

TEST_CASE("de sitter proper potential term is -9H^2/4") {
  for (double hub : {0.7, 1.0, 2.3}) {
    const double m = 3.0 * hub, k = 1.5 * hub;
    const auto prof =
        compile(de_sitter_spec(ScenarioKind::FlrwProper, hub, m, k), 0.0, 1.5);
    const double expected = -2.25 * hub * hub;
    for (std::size_t i = 0; i < prof.size(); i += 97) {
      const double a = std::exp(hub * prof.times()[i]);
      const double w = prof.omega()[i];
      const double potential = w * w - m * m - k * k / (a * a);
      CHECK(potential ==
            doctest::Approx(expected).epsilon(1e-12).scale(hub * hub));
    }
  }
}

TEST_CASE("vector field round trip recovers the scale history") {
  const double m = 1.7, k = 0.9;
  auto a_of = [](double t) { return 1.0 + 0.3 * std::sin(2.0 * t) + 0.1 * t; };
  ScenarioSpec spec;
  spec.kind = ScenarioKind::VectorField;
  spec.history = History::analytic(
      a_of, [](double t) { return 0.6 * std::cos(2.0 * t) + 0.1; },
      [](double t) { return -1.2 * std::sin(2.0 * t); });
  spec.mass = m;
  spec.mode_k = k;
  const auto prof = compile(spec, 0.0, 4.0);

  const auto map = trap_to_cosmo(prof, k, m, /*natural_units=*/true);
  REQUIRE(map.times.size() == prof.size());
  double a_min = std::numeric_limits<double>::infinity(), a_max = 0.0;
  for (std::size_t i = 0; i < map.times.size(); ++i) {
    const double truth = a_of(map.times[i]);
    CHECK(map.a[i] == doctest::Approx(truth).epsilon(1e-9));
    a_min = std::min(a_min, truth);
    a_max = std::max(a_max, truth);
  }
  CHECK(map.e_foldings ==
        doctest::Approx(std::log(a_max / a_min)).epsilon(1e-9));
  CHECK(map.direction == MapDirection::TrapToCosmo);
}

TEST_CASE("conformal and proper de sitter agree on pair production") {
  const double hub = 1.0, m = 2.0, k = 1.5;
  for (double tau_max : {0.6, 1.0, 1.5}) {
    const auto prof_p = compile(
        de_sitter_spec(ScenarioKind::FlrwProper, hub, m, k), 0.0, tau_max);
    const double t0 = -1.0 / hub;
    const double t1 = -std::exp(-hub * tau_max) / hub;
    const auto prof_c = compile(
        de_sitter_spec(ScenarioKind::FlrwConformal, hub, m, k), t0, t1);

    const double wp0 = prof_p.omega().front();
    const double wp1 = prof_p.omega().back();
    const double wc0 = prof_c.omega().front();
    const auto traj_p =
        gaussian::evolve(gaussian::GaussianState::vacuum(wp0), prof_p, {});
    const auto traj_c =
        gaussian::evolve(gaussian::GaussianState::vacuum(wc0), prof_c, {});
    const double n_direct =
        gaussian::bogoliubov(traj_p.transfers.back(), wp0, wp1).n_pair();

    // Conformal-time solution mapped into the proper-time picture: the mode
    // functions are related by chi = sqrt(a) v with d tau = a dt, which in
    // quadrature coordinates is the linear map below.
    auto basis = [&](double a) {
      Eigen::Matrix2d mm;
      mm << std::sqrt(a), 0.0, 0.5 * hub * std::sqrt(a) / wp0,
          wc0 / (std::sqrt(a) * wp0);
      return mm;
    };
    gaussian::TransferMatrix tm;
    tm.s = basis(std::exp(hub * tau_max)) * traj_c.transfers.back().s *
           basis(1.0).inverse();
    tm.omega_ref = wp0;
    const double n_mapped = gaussian::bogoliubov(tm, wp0, wp1).n_pair();

    CHECK(n_direct > 1.0e-3);
    CHECK(n_mapped == doctest::Approx(n_direct).epsilon(1e-4));
  }
}

TEST_CASE("compiled profiles drive the oscillator directly") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::VectorField;
  spec.history = History::constant(2.0);
  spec.mass = 1.0;
  spec.mode_k = 0.5;
  const auto prof = compile(spec, 0.0, 3.0);
  const double w0 = prof.omega().front();
  const auto traj =
      gaussian::evolve(gaussian::GaussianState::vacuum(w0), prof, {});
  traj.states.back().validate();
  // Static mode: evolution is a phase rotation, no pairs.
  CHECK(gaussian::bogoliubov(traj.transfers.back(), w0,
                             prof.omega().back())
            .n_pair() < 1.0e-10);
}

TEST_CASE("trap pulse maps to more e-foldings than the frequency") {
  const auto cal = testutil::default_cal();
  const auto prof = ramps::build_pulse(testutil::fig2_pulse(cal), cal,
                                       testutil::default_grid(cal));
  const double omega_folds = ramps::diagnostics(prof).e_foldings;
  CHECK(omega_folds == doctest::Approx(std::log(5.0)).epsilon(1e-9));

  const auto flat = trap_to_cosmo(prof, 0.0, kMg25MassKg);
  CHECK(flat.e_foldings == doctest::Approx(omega_folds).epsilon(1e-12));

  double previous = omega_folds;
  for (double k : {1.0e-3, 3.0e-3, 6.0e-3, 9.0e-3}) {
    const auto map = trap_to_cosmo(prof, k, kMg25MassKg);
    CHECK(map.e_foldings > std::log(5.0));
    CHECK(map.e_foldings > previous);
    previous = map.e_foldings;
  }
}

TEST_CASE("constant profiles map to zero e-foldings") {
  const double w = kTwoPi * 1.0e6;
  const ramps::FrequencyProfile prof(
      {0.0, 1.0e-6, 2.0e-6}, {w, w, w},
      {{ramps::SegmentKind::Hold, 0.0, 2.0e-6}});
  CHECK(trap_to_cosmo(prof, 1.0e-3, kMg25MassKg).e_foldings == 0.0);
}

TEST_CASE("modes below the frequency floor cannot be mapped") {
  const auto cal = testutil::default_cal();
  const auto prof = ramps::build_pulse(testutil::fig2_pulse(cal), cal,
                                       testutil::default_grid(cal));
  // c k above the minimum pulse frequency 2pi * 0.5 MHz
  CHECK_THROWS_AS(trap_to_cosmo(prof, 0.012, kMg25MassKg), NumericalError);
  CHECK_THROWS_WITH_AS(trap_to_cosmo(prof, 0.012, kMg25MassKg),
                       doctest::Contains("unmappable"), NumericalError);
  CHECK_THROWS_AS(trap_to_cosmo(prof, 0.0, -1.0), ConfigError);
}

TEST_CASE("tachyonic windows are rejected with the interval") {
  // Massless conformal de Sitter: Omega^2 = k^2 - 2/t^2 < 0 for small k.
  const auto spec =
      de_sitter_spec(ScenarioKind::FlrwConformal, 1.0, 0.0, 0.1);
  CHECK_THROWS_WITH_AS(compile(spec, -1.0, -0.2),
                       doctest::Contains("tachyonic"), NumericalError);
}

TEST_CASE("hawking scenario tracks the near-horizon dictionary") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::Hawking;
  spec.surface_gravity = 2.0;
  spec.mode_k = 1.5;
  spec.mass = 0.8;
  const auto prof = compile(spec, 0.2, 2.0);
  for (std::size_t i = 0; i < prof.size(); i += 211) {
    const double kt = spec.surface_gravity * prof.times()[i];
    const double expected =
        std::sqrt(spec.mode_k * spec.mode_k + spec.mass * spec.mass / (kt * kt));
    CHECK(prof.omega()[i] == doctest::Approx(expected).epsilon(1e-12));
  }

  // The other side of the horizon is equivalent.
  const auto mirror = compile(spec, -2.0, -0.2);
  CHECK(mirror.omega_at(-1.0) ==
        doctest::Approx(prof.omega_at(1.0)).epsilon(1e-9));

  CHECK_THROWS_AS(compile(spec, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(compile(spec, 1.0e-9, 1.0), ConfigError);
  ScenarioSpec bad = spec;
  bad.surface_gravity = 0.0;
  CHECK_THROWS_AS(compile(bad, 0.2, 2.0), ConfigError);
}

TEST_CASE("sauter-schwinger mode follows the vector potential") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::SauterSchwinger;
  spec.history = History::sauter_pulse(0.5, 2.0);
  spec.mode_k = 1.0;
  spec.charge = 1.0;
  spec.mass = 0.5;
  const auto prof = compile(spec, -3.0, 3.0);
  const History pot = History::sauter_pulse(0.5, 2.0);
  for (std::size_t i = 0; i < prof.size(); i += 499) {
    const double t = prof.times()[i];
    const double kin = spec.mode_k - spec.charge * pot.value(t);
    const double expected = std::hypot(kin, spec.mass);
    CHECK(prof.omega()[i] == doctest::Approx(expected).epsilon(1e-12));
  }

  // A = 0 is a free massive mode.
  ScenarioSpec free_mode = spec;
  free_mode.history = History();
  const auto flat = compile(free_mode, -1.0, 1.0);
  CHECK(flat.segments().front().kind == ramps::SegmentKind::Hold);
  CHECK(flat.omega_at(0.0) ==
        doctest::Approx(std::hypot(1.0, 0.5)).epsilon(1e-15));
}

TEST_CASE("keldysh parameter scales inversely with the field") {
  const double w = 2.0e15, m = kElectronMassKg, q = kElementaryCharge;
  const double g1 = keldysh(w, m, q, 1.0e13);
  const double g2 = keldysh(w, m, q, 2.0e13);
  CHECK(g2 == doctest::Approx(0.5 * g1).epsilon(1e-15));
  CHECK(std::isinf(keldysh(w, m, q, 0.0)));
  CHECK_THROWS_AS(keldysh(w, m, q, -1.0), ConfigError);
  CHECK_THROWS_AS(keldysh(w, -m, q, 1.0), ConfigError);
  CHECK_THROWS_AS(keldysh(0.0, m, q, 1.0), ConfigError);
}

TEST_CASE("keldysh at the schwinger field is hbar omega over m c^2") {
  const double m = kElectronMassKg, q = kElementaryCharge;
  const double omega = 1.55 * kElementaryCharge / kHbar;  // 1.55 eV photon
  const double c = kSpeedOfLight;
  const double schwinger = m * m * c * c * c / (q * kHbar);
  const double gamma = keldysh(omega, m, q, schwinger);
  CHECK(gamma == doctest::Approx(kHbar * omega / (m * c * c)).epsilon(1e-12));
  CHECK(gamma == doctest::Approx(3.033e-6).epsilon(2e-3));
}

TEST_CASE("keldysh regimes split at unity") {
  CHECK(keldysh_regime(0.02) == "tunneling");
  CHECK(keldysh_regime(50.0) == "multi-photon");
  CHECK(keldysh_regime(std::numeric_limits<double>::infinity()) ==
        "multi-photon");
  CHECK_THROWS_AS(keldysh_regime(0.0), ConfigError);
  CHECK_THROWS_AS(keldysh_regime(-2.0), ConfigError);
}

TEST_CASE("ion modes reproduce the rocking calibration") {
  const double w_mf = kTwoPi * 2.7e6, w_lf = kTwoPi * 1.2e6;
  const auto modes =
      ion_mode_decomposition(w_mf, {0.0, -w_lf * w_lf, 2.0 * w_lf * w_lf});
  REQUIRE(modes.size() == 3);
  CHECK(modes[0] == doctest::Approx(w_mf).epsilon(1e-15));
  CHECK(modes[1] ==
        doctest::Approx(ramps::rocking_from_modes(w_mf, w_lf)).epsilon(1e-12));
  CHECK(modes[2] > modes[0]);

  CHECK_THROWS_WITH_AS(
      ion_mode_decomposition(w_mf, {0.0, -1.1 * w_mf * w_mf}),
      doctest::Contains("mode 1"), NumericalError);
}

TEST_CASE("compile validates its inputs") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::FlrwProper;
  spec.mass = 1.0;
  CHECK_THROWS_AS(compile(spec, 0.0, 1.0), ConfigError);  // no history

  spec.history = History::de_sitter_proper(1.0);
  CHECK_THROWS_AS(compile(spec, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(compile(spec, 1.0, 0.0), ConfigError);
  spec.mass = -1.0;
  CHECK_THROWS_AS(compile(spec, 0.0, 1.0), ConfigError);
  spec.mass = 1.0;

  CompileOptions opts;
  opts.probe_points = 4;
  CHECK_THROWS_AS(compile(spec, 0.0, 1.0, opts), ConfigError);

  // Negative scale factor is caught where it happens.
  ScenarioSpec sunken;
  sunken.kind = ScenarioKind::VectorField;
  sunken.history = History::constant(-1.0);
  sunken.mass = 1.0;
  CHECK_THROWS_AS(compile(sunken, 0.0, 1.0), ConfigError);
}

TEST_CASE("grid density tracks the peak frequency") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::VectorField;
  spec.history = History::constant(1.0);
  spec.mass = 0.0;
  spec.mode_k = 10.0;
  const auto prof = compile(spec, 0.0, 2.0);
  const double expected = std::ceil(2.0 * 400.0 * 10.0);
  CHECK(static_cast<double>(prof.size()) ==
        doctest::Approx(expected + 1).epsilon(2e-3));

  spec.mode_k = 1.0e9;
  CHECK_THROWS_WITH_AS(compile(spec, 0.0, 2.0), doctest::Contains("grid"),
                       NumericalError);
}
