#include "qdim/analysis.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "qdim/errors.hpp"
#include "qdim/rng.hpp"
#include "qdim/stats.hpp"

using namespace qdim;
using std::numbers::pi;

namespace {

std::vector<double> positions(double lo, double hi, double step) {
  std::vector<double> xs;
  for (double x = lo; x <= hi + 1e-9; x += step) xs.push_back(x);
  return xs;
}

SampleProfile step_sample(double height_nm, double position_um = 0.0) {
  SampleProfile profile;
  profile.shape = StepProfile{height_nm, position_um};
  profile.material = MaterialModel();
  return profile;
}

ScanConfig quantum_config(std::uint64_t seed) {
  ScanConfig config;
  config.model = InterferenceModel(2, 0.952, 0.41, 0.0);
  config.geometry = BeamGeometry(11.25, 45.0);
  config.budget = PhotonBudget(460.0);
  config.positions_x = positions(-150.0, 150.0, 5.0);
  config.rng_seed = seed;
  return config;
}

}  // namespace

TEST_CASE("snr_analytic evaluates the first-order sensitivity") {
  // At the quadrature point with perfect visibility: sqrt(k/2) N dphi.
  const InterferenceModel quadrature(2, 1.0, pi / 4.0, 0.0);
  CHECK(snr_analytic(quadrature, PhotonBudget(460.0), 0.01).value ==
        doctest::Approx(std::sqrt(230.0) * 2.0 * 0.01).epsilon(1e-12));

  // Two-photon probe near its optimum.
  const auto quantum =
      snr_analytic(InterferenceModel(2, 0.952, 0.376, 0.046), PhotonBudget(460.0), 0.0626);
  CHECK_FALSE(quantum.degenerate);
  CHECK(quantum.value == doctest::Approx(2.134).epsilon(1e-3));

  // Classical probe, same total photon number.
  const auto classical =
      snr_analytic(InterferenceModel(1, 0.971, 0.669, 0.046), PhotonBudget(920.0), 0.0626);
  CHECK(classical.value == doctest::Approx(1.580).epsilon(1e-3));

  // No first-order signal at sin(N Phi0) = 0 with V < 1.
  CHECK(snr_analytic(InterferenceModel(2, 0.9, 0.0, 0.0), PhotonBudget(100.0), 0.05).value ==
        0.0);

  // The 0/0 point returns the analytic limit, flagged.
  const auto degenerate =
      snr_analytic(InterferenceModel(2, 1.0, 0.0, 0.046), PhotonBudget(460.0), 0.0626);
  CHECK(degenerate.degenerate);
  CHECK(degenerate.value ==
        doctest::Approx((1.0 - 0.046) * std::sqrt(460.0) * 2.0 * 0.0626).epsilon(1e-12));
}

TEST_CASE("snr_step_response approaches the first-order SNR for small steps") {
  const InterferenceModel model(2, 0.952, 0.41, 0.046);
  const PhotonBudget budget(460.0);
  const double eq = snr_analytic(model, budget, 1e-6).value;
  CHECK(snr_step_response(model, budget, 1e-6) == doctest::Approx(eq).epsilon(1e-5));

  // At the reference step phase the peak response sits 5.6% above the
  // linearized sensitivity.
  const double exact = snr_step_response(model, budget, 0.0626);
  const double slope = snr_analytic(model, budget, 0.0626).value;
  CHECK(exact == doctest::Approx(2.2494).epsilon(1e-3));
  CHECK(exact / slope == doctest::Approx(1.0563).epsilon(1e-3));
}

TEST_CASE("snr_max is the bias-phase envelope") {
  CHECK(snr_max(InterferenceModel(2, 1.0, 0.0, 0.0), PhotonBudget(400.0), 0.05) ==
        doctest::Approx(std::sqrt(400.0) * 2.0 * 0.05).epsilon(1e-12));

  // Visibility penalty factor sqrt(1 - sqrt(1 - V^2)) for V = 0.952.
  const double factor = snr_max(InterferenceModel(2, 0.952, 0.0, 0.0), PhotonBudget(1.0), 1.0) /
                        (std::sqrt(1.0) * 2.0);
  CHECK(factor == doctest::Approx(0.833).epsilon(1e-3));

  CHECK(snr_max(InterferenceModel(2, 0.952, 0.3, 0.046), PhotonBudget(460.0), 0.0) == 0.0);

  // Dominance over the whole bias range.
  for (int photons : {1, 2, 3, 4}) {
    for (double v : {0.5, 0.9, 0.952, 0.971, 0.999}) {
      const PhotonBudget budget(500.0);
      const double envelope =
          snr_max(InterferenceModel(photons, v, 0.0, 0.0), budget, 0.05);
      for (double phi0 : positions(0.01, pi / photons - 0.01, 0.02)) {
        const InterferenceModel model(photons, v, phi0, 0.0);
        CHECK(snr_analytic(model, budget, 0.05).value <= envelope * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("optimal_bias attains the envelope") {
  CHECK(optimal_bias(2, 0.952) == doctest::Approx(0.377).epsilon(2e-3));
  CHECK(optimal_bias(1, 0.971) == doctest::Approx(0.670).epsilon(2e-3));
  CHECK(optimal_bias(1, 1.0) == 0.0);
  CHECK_THROWS_AS(optimal_bias(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_bias(0, 0.5), std::invalid_argument);

  for (int photons : {1, 2, 3, 4}) {
    for (double v : {0.5, 0.9, 0.952, 0.971, 0.999}) {
      const double phi0 = optimal_bias(photons, v);
      CHECK(phi0 > 0.0);
      CHECK(phi0 <= pi / (2.0 * photons) + 1e-12);
      const PhotonBudget budget(700.0);
      const InterferenceModel model(photons, v, phi0, 0.02);
      const double at_optimum = snr_analytic(model, budget, 0.04).value;
      const double envelope = snr_max(model, budget, 0.04);
      CHECK(std::abs(at_optimum - envelope) / envelope < 1e-9);
    }
  }
}

TEST_CASE("snr_bias_derivative matches finite differences") {
  const PhotonBudget budget(460.0);
  for (int photons : {1, 2, 3}) {
    for (double v : {0.7, 0.952}) {
      for (double phi0 : positions(0.15, pi / photons - 0.15, 0.11)) {
        const double closed =
            snr_bias_derivative(InterferenceModel(photons, v, phi0, 0.046), budget, 0.0626);
        const double fd = oracles::central_difference(
            [&](double b) {
              return snr_analytic(InterferenceModel(photons, v, b, 0.046), budget, 0.0626)
                  .value;
            },
            phi0, 1e-6);
        CHECK(closed == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("quantum_advantage reduces to sqrt(N) at unit visibility") {
  for (int photons = 1; photons <= 9; ++photons) {
    CHECK(quantum_advantage(1.0, 1.0, photons) ==
          doctest::Approx(std::sqrt(static_cast<double>(photons))).epsilon(1e-15));
  }
  CHECK(quantum_advantage(0.952, 0.971, 2) == doctest::Approx(1.3505).epsilon(1e-3));
  CHECK(quantum_advantage(0.8, 0.8, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(quantum_advantage(0.0, 0.9, 2), std::invalid_argument);
}

TEST_CASE("fit_step_curve inverts a noiseless step response") {
  const BeamGeometry geom(11.25, 45.0);
  const double b_true = 54.8;
  const double a_true = 21.2;
  const double s_true = 12.5;
  const auto xs = positions(-150.0, 150.0, 5.0);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(b_true + a_true * window_weight(geom, x - s_true));

  const auto fit = fit_step_curve(xs, ys, geom);
  CHECK(std::abs(fit.background - b_true) / b_true < 1e-6);
  CHECK(std::abs(fit.amplitude - a_true) / a_true < 1e-6);
  CHECK(std::abs(fit.position_um - s_true) / s_true < 1e-6);
  CHECK(fit.sse < 1e-10);
}

TEST_CASE("fit_step rejects flat data") {
  ScanRecord record;
  record.model = InterferenceModel(2, 0.952, 0.41, 0.0);
  record.geometry = BeamGeometry(11.25, 45.0);
  record.budget = PhotonBudget(460.0);
  record.material = MaterialModel();
  record.x_um = positions(-150.0, 150.0, 5.0);
  record.expected_probability.assign(record.x_um.size(), 0.1);
  record.expected_counts.assign(record.x_um.size(), 46.0);
  record.sampled_counts.assign(record.x_um.size(), 46);
  CHECK_THROWS_AS(fit_step(record, record.geometry), FitError);
}

TEST_CASE("seeded quantum scans fit near the step-response sensitivity") {
  const double dphi = 0.0626;
  const auto sample = step_sample(phase_to_height(dphi, MaterialModel()));

  // Fine 1 um grid: the estimator variance is dominated by the physics, not
  // the sampling.
  int in_band = 0;
  std::vector<double> snrs;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ScanConfig config = quantum_config(mix64(0x7E57AB ^ mix64(seed + 1)));
    config.positions_x = positions(-150.0, 150.0, 1.0);
    const auto record = scan_1d(sample, config);
    const auto report = fit_step(record, record.geometry);
    snrs.push_back(report.snr);
    if (report.snr >= 1.85 && report.snr <= 2.75) ++in_band;
  }
  CHECK(in_band >= 90);

  // The mean tracks the finite-step peak-over-noise prediction. (It sits
  // ~6% above the first-order slope formula at this step phase: the fitted
  // peak measures cos(N Phi0) - cos(N(dphi + Phi0)), not its tangent.)
  const double exact =
      snr_step_response(InterferenceModel(2, 0.952, 0.41, overlap_xi(BeamGeometry(11.25, 45.0))),
                        PhotonBudget(460.0), dphi);
  CHECK(std::abs(mean(snrs) - exact) / exact < 0.03);
}

TEST_CASE("step height is recovered from a seeded record") {
  const auto sample = step_sample(17.3);  // dphi about 0.0685
  const auto record = scan_1d(sample, quantum_config(314159));
  const auto report = fit_step(record, record.geometry);
  CHECK(report.step_height_sigma_nm > 0.0);
  CHECK(std::abs(report.step_height_nm - 17.3) < 3.0 * report.step_height_sigma_nm);

  // Noise is the rms about the background level, so it sits near sqrt(k P0).
  const double p0 = 0.5 * (1.0 - 0.952 * std::cos(0.82));
  CHECK(report.noise == doctest::Approx(std::sqrt(460.0 * p0)).epsilon(0.25));
}

TEST_CASE("bias_sweep tracks the analytic curve") {
  const double dphi = 0.0626;
  const auto sample = step_sample(phase_to_height(dphi, MaterialModel()));
  ScanConfig base = quantum_config(777);
  base.budget = PhotonBudget(575.0);  // total photons 1150 at N = 2
  base.threads = 1;

  const std::vector<double> grid = {0.3, 0.6, 0.9, 1.2};
  const auto points = bias_sweep(sample, base, grid, 12);
  REQUIRE(points.size() == grid.size());
  for (const auto& point : points) {
    CHECK(point.scans_ok == 12);
    CHECK(point.scans_failed == 0);
    CHECK(point.analytic_snr > 0.0);
    CHECK(std::abs(point.empirical_snr_mean - point.analytic_snr) <=
          3.0 * point.empirical_snr_stddev);
  }

  // Past the optimum the sensitivity falls toward zero at the interval end
  // (sin(N Phi0) -> 0 while the noise stays finite).
  CHECK(points[1].analytic_snr > points[2].analytic_snr);
  CHECK(points[2].analytic_snr > points[3].analytic_snr);
  CHECK(points[3].analytic_snr < 0.5 * points[0].analytic_snr);
  CHECK(points[3].empirical_snr_mean < points[1].empirical_snr_mean);

  SUBCASE("deterministic and thread-count independent") {
    const auto again = bias_sweep(sample, base, grid, 12);
    ScanConfig threaded = base;
    threaded.threads = 3;
    const auto parallel = bias_sweep(sample, threaded, grid, 12);
    for (std::size_t i = 0; i < points.size(); ++i) {
      CHECK(points[i].empirical_snr_mean == again[i].empirical_snr_mean);
      CHECK(points[i].empirical_snr_mean == parallel[i].empirical_snr_mean);
      CHECK(points[i].empirical_snr_stddev == parallel[i].empirical_snr_stddev);
    }
  }
}
