#pragma once

#include <span>
#include <vector>

namespace qdim {

/// Parameters of the odd-count detection fringe
///   P(phi) = (1 - V cos(N phi + N Phi0)) (1 - xi)/2
///          + (1 - V cos(N Phi0)) xi/2.
/// `photons` is N (photons per probe state), `visibility` the fringe
/// contrast V_N, `bias_phase` the operating point Phi0, `overlap` the
/// beam-overlap fraction xi that dilutes the phase-dependent term.
struct InterferenceModel {
  int photons = 1;
  double visibility = 1.0;
  double bias_phase = 0.0;
  double overlap = 0.0;

  InterferenceModel() = default;
  InterferenceModel(int n, double v, double phi0, double xi);
};

/// Mean number of N-photon probe states spent per position.
struct PhotonBudget {
  double states_per_position = 0.0;

  PhotonBudget() = default;
  explicit PhotonBudget(double k);

  double total_photons(int photons_per_state) const {
    return states_per_position * photons_per_state;
  }
};

/// One fringe sample: interferometer phase and (expected or measured) counts.
struct FringeSample {
  double phase_rad = 0.0;
  double counts = 0.0;
};

/// Result of the sinusoid fit a + b cos(w phi + c) to fringe data, with
/// b >= 0 and c principal. For an odd-count fringe the counts trough sits at
/// phi = -Phi0, so `bias_phase` reports the operating point under that
/// convention: ((c - pi) mod 2 pi) / w, in [0, 2 pi / w).
struct FringeFit {
  double offset = 0.0;        // a
  double amplitude = 0.0;     // b
  double frequency = 0.0;     // w (fringes per 2 pi of phase)
  double period_rad = 0.0;    // 2 pi / w
  double phase_offset = 0.0;  // c, principal value
  double bias_phase = 0.0;    // odd-count operating point
  double visibility = 0.0;    // b / a
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Odd-count detection probability; in [0, 1] for any valid model.
double detection_probability(const InterferenceModel& model, double phi);

/// Expected detection events per position: k * P(phi).
double expected_counts(const InterferenceModel& model, const PhotonBudget& budget, double phi);

/// Expected fringe over a phase grid.
std::vector<FringeSample> fringe_scan(const InterferenceModel& model, const PhotonBudget& budget,
                                      std::span<const double> phase_grid);

/// Least-squares fringe fit with free offset, amplitude, frequency and
/// phase. Needs >= 5 samples spanning at least one period. Throws FitError
/// on degenerate data (no modulation) or an insignificant fringe.
FringeFit fit_visibility(std::span<const FringeSample> data);

}  // namespace qdim
