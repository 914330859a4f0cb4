// Acceptance suite: one line per criterion, checked at the stated tolerance
// against the reference experiment's published figures. Exits nonzero if any
// criterion fails.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "qdim/analysis.hpp"
#include "qdim/config.hpp"
#include "qdim/errors.hpp"
#include "qdim/fock.hpp"
#include "qdim/interference.hpp"
#include "qdim/io.hpp"
#include "qdim/optics.hpp"
#include "qdim/rng.hpp"
#include "qdim/scan.hpp"
#include "qdim/stats.hpp"

using namespace qdim;
using std::numbers::pi;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %2d  %-28s %s\n", pass ? "PASS" : "FAIL", index, name, detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

std::vector<double> positions(double lo, double hi, double step) {
  std::vector<double> xs;
  for (double x = lo; x <= hi + 1e-9; x += step) xs.push_back(x);
  return xs;
}

// Reference experiment constants.
constexpr double kSigmaUm = 11.25;        // beam diameter 45 um read as 4 sigma
constexpr double kSeparationUm = 45.0;
constexpr double kQuantumVisibility = 0.952;
constexpr double kClassicalVisibility = 0.971;
constexpr double kQuantumBias = 0.41;     // operating points used for the scans
constexpr double kClassicalBias = 0.66;
constexpr double kQuantumBudget = 460.0;  // N k = 920 photons per position
constexpr double kClassicalBudget = 920.0;
constexpr double kReferenceQuantumSnr = 2.13;
constexpr double kReferenceClassicalSnr = 1.58;
constexpr double kReferenceDphi = 0.0626;  // back-derived from the published SNR
constexpr double kStepHeightNm = 17.3;

ScanConfig make_config(int photons, double visibility, double bias, double budget,
                       std::uint64_t seed) {
  ScanConfig config;
  config.model = InterferenceModel(photons, visibility, bias, 0.0);
  config.geometry = BeamGeometry(kSigmaUm, kSeparationUm);
  config.budget = PhotonBudget(budget);
  config.positions_x = positions(-150.0, 150.0, 5.0);
  config.rng_seed = seed;
  return config;
}

SampleProfile step_sample(double height_nm) {
  SampleProfile profile;
  profile.shape = StepProfile{height_nm, 0.0};
  profile.material = MaterialModel();
  return profile;
}

struct Ensemble {
  std::vector<double> snr;
  std::vector<double> height;
  std::size_t failures = 0;
};

Ensemble run_ensemble(int photons, double visibility, double bias, double budget,
                      double height_nm, int seeds, std::uint64_t salt) {
  Ensemble out;
  const auto sample = step_sample(height_nm);
  for (int i = 0; i < seeds; ++i) {
    auto config = make_config(photons, visibility, bias, budget,
                              mix64(salt ^ mix64(static_cast<std::uint64_t>(i) + 1)));
    config.positions_x = positions(-150.0, 150.0, 1.0);  // fine scan
    try {
      const auto record = scan_1d(sample, config);
      const auto fit = fit_step(record, config.geometry);
      out.snr.push_back(fit.snr);
      out.height.push_back(fit.step_height_nm);
    } catch (const FitError&) {
      ++out.failures;
    }
  }
  return out;
}

void criterion_1_quantum_advantage() {
  const double ratio = quantum_advantage(kQuantumVisibility, kClassicalVisibility, 2);
  report(1, "quantum-advantage", std::abs(ratio - 1.351) <= 0.005,
         "ratio=" + fmt(ratio) + " expected 1.351 +- 0.005 (reference 1.35 +- 0.12)");
}

void criterion_2_optimal_bias() {
  const double quantum = optimal_bias(2, kQuantumVisibility);
  const double classical = optimal_bias(1, kClassicalVisibility);
  const bool pass =
      std::abs(quantum - 0.376) <= 0.005 && std::abs(classical - 0.669) <= 0.005;
  report(2, "optimal-bias-phases", pass,
         "N2=" + fmt(quantum) + " expected 0.376 +- 0.005; N1=" + fmt(classical) +
             " expected 0.669 +- 0.005");
}

void criterion_3_overlap() {
  const double xi = overlap_xi(BeamGeometry(kSigmaUm, kSeparationUm));
  report(3, "overlap-integral", std::abs(xi - 0.0455) <= 0.0010,
         "xi=" + fmt(xi) + " expected 0.0455 +- 0.0010 (reference 0.046)");
}

void criterion_4_oracle_equivalence() {
  double worst = 0.0;
  std::vector<double> grid(50);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = 2.0 * pi * static_cast<double>(i) / static_cast<double>(grid.size());
  for (int photons = 1; photons <= 6; ++photons) {
    for (double bias : {0.0, 0.3, 0.41, 0.66}) {
      const auto brute = oracle_fringe(photons, bias, grid);
      const InterferenceModel model(photons, 1.0, bias, 0.0);
      for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::abs(brute[i] - detection_probability(model, grid[i])));
    }
  }
  report(4, "oracle-equivalence", worst < 1e-10,
         "max |brute force - closed form| = " + fmt(worst) + " over N=1..6 x 50 phases");
}

void criterion_5_period_halving() {
  const PhotonBudget budget(920.0);
  double periods[2] = {0.0, 0.0};
  for (int photons : {1, 2}) {
    const double visibility = photons == 2 ? kQuantumVisibility : kClassicalVisibility;
    const InterferenceModel model(photons, visibility, 0.41, 0.0);
    std::vector<double> grid(72);
    for (std::size_t i = 0; i < grid.size(); ++i)
      grid[i] = 2.0 * pi * static_cast<double>(i) / static_cast<double>(grid.size());
    const auto expected = fringe_scan(model, budget, grid);
    std::vector<FringeSample> noisy(expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      RandomStream stream(0x9E1u + photons, i);
      noisy[i] = {expected[i].phase_rad,
                  static_cast<double>(stream.next_poisson(expected[i].counts))};
    }
    periods[photons - 1] = fit_visibility(noisy).period_rad;
  }
  const bool pass = std::abs(periods[1] - pi) <= 0.02 * pi &&
                    std::abs(periods[1] - 0.5 * periods[0]) <= 0.02 * 0.5 * periods[0];
  report(5, "fringe-period-halving", pass,
         "N2 period=" + fmt(periods[1]) + " expected pi +- 2%; N1 period=" + fmt(periods[0]));
}

void criterion_6_snr_reproduction() {
  // Documented derivation of the reference differential phase: invert the
  // first-order sensitivity at the quantum operating point for SNR = 2.13.
  const double xi = overlap_xi(BeamGeometry(kSigmaUm, kSeparationUm));
  const double sensitivity = (1.0 - xi) * std::sqrt(kQuantumBudget / 2.0) * 2.0 *
                             kQuantumVisibility * std::abs(std::sin(2.0 * kQuantumBias)) /
                             std::sqrt(1.0 - kQuantumVisibility * std::cos(2.0 * kQuantumBias));
  const double dphi_derived = kReferenceQuantumSnr / sensitivity;
  const bool derivation_ok = std::abs(dphi_derived - kReferenceDphi) <= 2e-4;

  const double height = phase_to_height(kReferenceDphi, MaterialModel());
  const int seeds = 500;
  const auto quantum = run_ensemble(2, kQuantumVisibility, kQuantumBias, kQuantumBudget, height,
                                    seeds, 0xACC6A);
  const auto classical = run_ensemble(1, kClassicalVisibility, kClassicalBias, kClassicalBudget,
                                      height, seeds, 0xACC6B);

  const double analytic_q =
      snr_analytic(InterferenceModel(2, kQuantumVisibility, kQuantumBias, xi),
                   PhotonBudget(kQuantumBudget), kReferenceDphi)
          .value;
  const double analytic_c =
      snr_analytic(InterferenceModel(1, kClassicalVisibility, kClassicalBias, xi),
                   PhotonBudget(kClassicalBudget), kReferenceDphi)
          .value;
  const double mean_q = mean(quantum.snr);
  const double mean_c = mean(classical.snr);
  const double std_q = sample_stddev(quantum.snr);
  const double std_c = sample_stddev(classical.snr);

  const bool mean_q_ok = std::abs(mean_q - analytic_q) <= 0.05 * analytic_q;
  const bool mean_c_ok = std::abs(mean_c - analytic_c) <= 0.05 * analytic_c;
  const bool band_q_ok = std::abs(kReferenceQuantumSnr - mean_q) <= std_q;
  const bool band_c_ok = std::abs(kReferenceClassicalSnr - mean_c) <= std_c;
  const bool pass = derivation_ok && quantum.failures == 0 && classical.failures == 0 &&
                    mean_q_ok && mean_c_ok && band_q_ok && band_c_ok;

  auto leg = [](bool ok) { return ok ? "ok" : "FAIL"; };
  report(6, "end-to-end-snr", pass,
         "quantum mean=" + fmt(mean_q) + "+-" + fmt(std_q) + " vs first-order " + fmt(analytic_q) +
             " [" + leg(mean_q_ok) + "], ref 2.13 in 1 sigma [" + leg(band_q_ok) +
             "]; classical mean=" + fmt(mean_c) + "+-" + fmt(std_c) + " vs first-order " +
             fmt(analytic_c) + " [" + leg(mean_c_ok) + "], ref 1.58 in 1 sigma [" +
             leg(band_c_ok) + "]; dphi derived=" + fmt(dphi_derived) +
             " (fitted peaks track the finite-step response " +
             fmt(snr_step_response(InterferenceModel(2, kQuantumVisibility, kQuantumBias,
                                                     overlap_xi(BeamGeometry(kSigmaUm,
                                                                             kSeparationUm))),
                                   PhotonBudget(kQuantumBudget), kReferenceDphi)) +
             ", 5.6% above the first-order value at this step phase)");
}

void criterion_7_noise_law() {
  auto config = make_config(2, kQuantumVisibility, kQuantumBias, kQuantumBudget, 0);
  config.positions_x = positions(0.0, 995.0, 5.0);  // 200 featureless positions
  const auto flat = step_sample(0.0);

  std::vector<double> counts;
  counts.reserve(200 * 100);
  for (int seed = 0; seed < 100; ++seed) {
    config.rng_seed = mix64(0xBACC6 ^ mix64(static_cast<std::uint64_t>(seed) + 1));
    const auto record = scan_1d(flat, config);
    for (auto c : record.sampled_counts) counts.push_back(static_cast<double>(c));
  }
  const double p0 = 0.5 * (1.0 - kQuantumVisibility * std::cos(2.0 * kQuantumBias));
  const double expected = std::sqrt(kQuantumBudget * p0);
  const double measured = sample_stddev(counts);
  report(7, "background-noise-law", std::abs(measured - expected) / expected <= 0.05,
         "stddev=" + fmt(measured) + " expected sqrt(k P0)=" + fmt(expected) + " +- 5%");
}

void criterion_8_bias_sweep() {
  const double height = phase_to_height(kReferenceDphi, MaterialModel());
  const auto sample = step_sample(height);
  bool all_within = true;
  std::string detail;

  struct Spec {
    const char* name;
    int photons;
    double visibility;
    double total_photons;
    std::uint64_t seed;
  };
  for (const Spec& spec : {Spec{"N2", 2, kQuantumVisibility, 1150.0, 0x5EEE2},
                           Spec{"N1", 1, kClassicalVisibility, 1299.0, 0x5EEE1}}) {
    ScanConfig base = make_config(spec.photons, spec.visibility, 0.1,
                                  spec.total_photons / spec.photons, spec.seed);
    std::vector<double> grid(12);
    for (int i = 0; i < 12; ++i)
      grid[static_cast<std::size_t>(i)] = pi / spec.photons * (i + 1) / 13.0;
    const auto points = bias_sweep(sample, base, grid, 60);
    std::size_t within = 0;
    for (const auto& p : points) {
      if (p.empirical_snr_stddev > 0.0 &&
          std::abs(p.empirical_snr_mean - p.analytic_snr) <= 3.0 * p.empirical_snr_stddev)
        ++within;
    }
    all_within = all_within && within == points.size();
    detail += std::string(spec.name) + ": " + std::to_string(within) + "/12 within 3 sigma  ";
  }
  report(8, "bias-phase-sweep", all_within, detail);
}

void criterion_9_height_recovery() {
  const auto ensemble = run_ensemble(2, kQuantumVisibility, kQuantumBias, kQuantumBudget,
                                     kStepHeightNm, 200, 0x8E161);
  const double mean_height = mean(ensemble.height);
  report(9, "step-height-recovery",
         ensemble.failures == 0 && std::abs(mean_height - kStepHeightNm) <= 1.0,
         "mean=" + fmt(mean_height) + " nm expected " + fmt(kStepHeightNm) +
             " +- 1.0 nm (reference 17.0 +- 0.9)");
}

void criterion_10_property_suite() {
  bool ok = true;
  std::string detail;
  auto sub = [&](bool pass, const char* what) {
    ok = ok && pass;
    if (!pass) detail += std::string(" [") + what + "]";
  };

  // Normalization and self-inverse rotation on random states.
  {
    RandomStream rng(0xAC5EED);
    bool norm_ok = true, inverse_ok = true;
    for (int photons = 1; photons <= 10; ++photons) {
      TwoModeFockState state;
      state.total_photons = photons;
      state.amplitudes.resize(static_cast<std::size_t>(photons) + 1);
      double norm_sq = 0.0;
      for (auto& a : state.amplitudes) {
        a = {rng.next_double() - 0.5, rng.next_double() - 0.5};
        norm_sq += std::norm(a);
      }
      for (auto& a : state.amplitudes) a /= std::sqrt(norm_sq);
      const auto rotated = rotate_to_diagonal(state);
      norm_ok = norm_ok && std::abs(state_norm_sq(rotated) - 1.0) < 1e-12;
      inverse_ok =
          inverse_ok && states_equal_up_to_phase(rotate_to_diagonal(rotated), state, 1e-12);
    }
    sub(norm_ok, "normalization");
    sub(inverse_ok, "rotation-self-inverse");
  }

  // Fringe periodicity.
  {
    bool periodic = true;
    for (int photons : {1, 2, 3, 5}) {
      const InterferenceModel model(photons, 0.91, 0.37, 0.046);
      const double period = 2.0 * pi / photons;
      for (double phi = 0.0; phi < period; phi += period / 11.0)
        periodic = periodic && std::abs(detection_probability(model, phi) -
                                        detection_probability(model, phi + period)) < 1e-12;
    }
    sub(periodic, "periodicity");
  }

  // Envelope dominance and the gradient identity.
  {
    bool dominance = true, gradient = true;
    const PhotonBudget budget(460.0);
    for (int photons : {1, 2, 3, 4}) {
      for (double v : {0.5, 0.9, 0.952, 0.971, 0.999}) {
        const double envelope =
            snr_max(InterferenceModel(photons, v, 0.0, 0.046), budget, 0.0626);
        for (double phi0 = 0.02; phi0 < pi / photons - 0.02; phi0 += 0.02) {
          const InterferenceModel model(photons, v, phi0, 0.046);
          const double snr = snr_analytic(model, budget, 0.0626).value;
          dominance = dominance && snr <= envelope * (1.0 + 1e-12);
        }
        for (double phi0 = 0.15; phi0 < pi / photons - 0.15; phi0 += 0.08) {
          const InterferenceModel model(photons, v, phi0, 0.046);
          const double closed = snr_bias_derivative(model, budget, 0.0626);
          const double h = 1e-6;
          const InterferenceModel up(photons, v, phi0 + h, 0.046);
          const InterferenceModel down(photons, v, phi0 - h, 0.046);
          const double fd = (snr_analytic(up, budget, 0.0626).value -
                             snr_analytic(down, budget, 0.0626).value) /
                            (2.0 * h);
          const double scale = std::max(1.0, std::abs(fd));
          gradient = gradient && std::abs(closed - fd) / scale < 1e-5;
        }
      }
    }
    sub(dominance, "snr-envelope-dominance");
    sub(gradient, "snr-gradient");
  }

  // Determinism under seed and thread-count independence.
  {
    const auto sample = step_sample(kStepHeightNm);
    auto config = make_config(2, kQuantumVisibility, kQuantumBias, kQuantumBudget, 1234);
    const auto a = scan_1d(sample, config);
    const auto b = scan_1d(sample, config);
    sub(a.sampled_counts == b.sampled_counts, "scan-determinism");

    SampleProfile map_profile;
    map_profile.shape = make_q_relief(16, 16, 5.0, kStepHeightNm);
    map_profile.material = MaterialModel();
    ScanConfig map_config = config;
    map_config.positions_x = positions(0.0, 75.0, 5.0);
    map_config.positions_y = positions(0.0, 75.0, 5.0);
    map_config.threads = 1;
    const auto serial = scan_2d(map_profile, map_config);
    map_config.threads = 4;
    const auto parallel = scan_2d(map_profile, map_config);
    sub(serial.sampled_counts == parallel.sampled_counts, "thread-independence");
  }

  report(10, "property-suite", ok, ok ? "all invariants hold" : ("failed:" + detail));
}

}  // namespace

int main() {
  criterion_1_quantum_advantage();
  criterion_2_optimal_bias();
  criterion_3_overlap();
  criterion_4_oracle_equivalence();
  criterion_5_period_halving();
  criterion_6_snr_reproduction();
  criterion_7_noise_law();
  criterion_8_bias_sweep();
  criterion_9_height_recovery();
  criterion_10_property_suite();
  if (g_failures > 0) std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
