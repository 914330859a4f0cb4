#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdim/interference.hpp"
#include "qdim/optics.hpp"
#include "qdim/scan.hpp"

namespace qdim {

struct AnalysisOptions {
  /// Positions with window weight below this count as featureless background
  /// when estimating the noise level.
  double background_weight_threshold = 0.05;
  /// Step-position refinement tolerance, micrometers.
  double position_tolerance_um = 1e-7;
  int max_iterations = 200;
};

/// Signal-to-noise analytics value. `degenerate` marks the 0/0 operating
/// point V = 1, N Phi0 = 0, where the reported value is the analytic limit.
struct SnrEstimate {
  double value = 0.0;
  bool degenerate = false;
};

/// Least-squares parameters of C(s) = background + amplitude * w(s - s0).
struct StepCurveFit {
  double background = 0.0;
  double amplitude = 0.0;
  double position_um = 0.0;
  double background_sigma = 0.0;
  double amplitude_sigma = 0.0;
  double position_sigma_um = 0.0;
  double sse = 0.0;
  std::size_t points = 0;
};

/// Result of fitting C(s) = background + amplitude * w(s - s0) to a 1D scan.
struct SnrReport {
  double signal = 0.0;  // amplitude * w(0), counts above background at the peak
  double signal_sigma = 0.0;
  double noise = 0.0;  // rms of background counts about the fitted level
  double snr = 0.0;
  double snr_sigma = 0.0;
  double background = 0.0;
  double background_sigma = 0.0;
  double amplitude = 0.0;  // fitted A, signed
  double amplitude_sigma = 0.0;
  double step_position_um = 0.0;
  double step_position_sigma_um = 0.0;
  double step_phase_rad = 0.0;
  double step_phase_sigma_rad = 0.0;
  double step_height_nm = 0.0;
  double step_height_sigma_nm = 0.0;
  std::size_t background_points = 0;
};

struct BiasSweepPoint {
  double bias_phase = 0.0;
  double empirical_snr_mean = 0.0;
  double empirical_snr_stddev = 0.0;
  std::size_t scans_ok = 0;
  std::size_t scans_failed = 0;
  double analytic_snr = 0.0;
  double states_per_position = 0.0;
};

/// First-order SNR of a differential phase step dphi at the model's
/// operating point:
///   SNR = (1 - xi) sqrt(k/2) N V |sin(N Phi0)| / sqrt(1 - V cos(N Phi0)) * dphi.
/// Exactly 0 where sin(N Phi0) = 0 with V < 1 (no first-order signal). At
/// the 0/0 point (V = 1, N Phi0 = 0) returns the limit
/// (1 - xi) sqrt(k) N dphi flagged as degenerate.
SnrEstimate snr_analytic(const InterferenceModel& model, const PhotonBudget& budget,
                         double differential_phase);

/// Finite-step counterpart of snr_analytic: the exact peak of the two-term
/// step response over the background shot noise,
///   (1 - xi) (k/2) V [cos(N Phi0) - cos(N(dphi + Phi0))] / sqrt(k P(0)).
/// Approaches snr_analytic as dphi -> 0; for dphi ~ 0.06 it sits a few
/// percent above it (fringe curvature), which is what an unbiased fit of a
/// simulated scan actually estimates.
double snr_step_response(const InterferenceModel& model, const PhotonBudget& budget,
                         double differential_phase);

/// Envelope of snr_analytic over the bias phase:
///   (1 - xi) sqrt(k) N sqrt(1 - sqrt(1 - V^2)) * dphi.
double snr_max(const InterferenceModel& model, const PhotonBudget& budget,
               double differential_phase);

/// Bias phase attaining snr_max: cos(N Phi0) = (1 - sqrt(1 - V^2)) / V.
/// In (0, pi/(2N)] for 0 < V < 1; 0 in the degenerate V = 1 limit.
/// Throws std::invalid_argument for V <= 0.
double optimal_bias(int photons, double visibility);

/// d(snr_analytic)/d(Phi0), closed form, away from sin(N Phi0) = 0.
double snr_bias_derivative(const InterferenceModel& model, const PhotonBudget& budget,
                           double differential_phase);

/// Best-case SNR ratio of an N-photon entangled probe over a classical probe
/// spending the same total photon number:
///   sqrt(N) sqrt(1 - sqrt(1 - Vq^2)) / sqrt(1 - sqrt(1 - Vc^2)).
double quantum_advantage(double visibility_quantum, double visibility_classical, int photons);

/// Fit the step-response curve to a counts-versus-position series: coarse
/// grid search over the step position with the linear parameters profiled
/// out, then a golden-section polish. 1-sigma uncertainties come from the
/// linearized covariance at the optimum. Throws FitError on flat data or
/// non-convergence.
StepCurveFit fit_step_curve(std::span<const double> x_um, std::span<const double> counts,
                            const BeamGeometry& geometry, const AnalysisOptions& options = {});

/// Fit a 1D step-scan record. The fitted peak height above background is the
/// signal; the rms of background-region counts about the fitted level is the
/// noise. The step phase (and height) come from inverting the fringe formula
/// at the record's operating point.
SnrReport fit_step(const ScanRecord& record, const BeamGeometry& geometry,
                   const AnalysisOptions& options = {});

/// Empirical SNR versus bias phase: for every grid value, run
/// `seeds_per_point` independent simulated scans of `profile`, fit each, and
/// aggregate. The analytic column is snr_analytic with the same
/// visibility and the geometry-derived overlap. Cells run on parallel
/// workers; aggregation is order-independent.
std::vector<BiasSweepPoint> bias_sweep(const SampleProfile& profile, const ScanConfig& base_config,
                                       std::span<const double> bias_grid, int seeds_per_point,
                                       const AnalysisOptions& options = {});

}  // namespace qdim
