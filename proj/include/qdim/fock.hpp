#pragma once

#include <complex>
#include <vector>

namespace qdim {

enum class PolarizationBasis { HV, PM };

/// Pure state of N photons shared between two polarization modes.
/// amplitudes[n] multiplies the basis state with n photons in mode 1 and
/// N - n photons in mode 2, so the vector always has length N + 1.
/// Values are immutable in spirit: every operation returns a new state.
struct TwoModeFockState {
  int total_photons = 1;
  PolarizationBasis basis = PolarizationBasis::HV;
  std::vector<std::complex<double>> amplitudes;
};

/// Sum of |amplitude|^2; 1 for any physical state.
double state_norm_sq(const TwoModeFockState& state);

/// Compare as rays: gauge is fixed by rotating the largest-magnitude
/// amplitude of each state to the positive real axis.
bool states_equal_up_to_phase(const TwoModeFockState& a, const TwoModeFockState& b,
                              double tolerance = 1e-12);

/// (|N;0> + e^{i N phase} |0;N>) / sqrt(2) in the HV basis.
TwoModeFockState make_noon(int total_photons, double relative_phase);

/// Phase shift on one mode: the amplitude of a basis state gains
/// e^{i phase * (photon count in that mode)}. mode is 1 or 2.
TwoModeFockState apply_mode_phase(const TwoModeFockState& state, double phase, int mode);

/// Balanced (diagonal) basis change P = (H+V)/sqrt(2), M = (H-V)/sqrt(2),
/// expanded with exact multinomial coefficients. Involutive: applying it
/// twice returns the original state. Tagged basis flips HV <-> PM.
TwoModeFockState rotate_to_diagonal(const TwoModeFockState& state);

/// Probability of finding an odd number of photons in the chosen mode
/// (1 or 2), i.e. the parity-style projector used at the detector.
double odd_count_probability(const TwoModeFockState& state, int mode);

/// Brute-force detection fringe: prepare a NOON state with the given bias
/// phase, imprint phi on mode 2, rotate to the diagonal basis and project on
/// odd counts in mode 2 (the minus-diagonal output). Supported for
/// total_photons in [1, 10], where the combinatorics stay exact in doubles.
std::vector<double> oracle_fringe(int total_photons, double bias_phase,
                                  const std::vector<double>& phase_grid);

}  // namespace qdim
