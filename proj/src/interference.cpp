#include "qdim/interference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qdim/errors.hpp"
#include "qdim/fit.hpp"

namespace qdim {

InterferenceModel::InterferenceModel(int n, double v, double phi0, double xi)
    : photons(n), visibility(v), bias_phase(phi0), overlap(xi) {
  if (n < 1) throw std::invalid_argument("model needs photons >= 1");
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("visibility must be in [0, 1]");
  if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("overlap must be in [0, 1)");
}

PhotonBudget::PhotonBudget(double k) : states_per_position(k) {
  if (!(k >= 0.0)) throw std::invalid_argument("photon budget must be >= 0");
}

double detection_probability(const InterferenceModel& model, double phi) {
  const double n = static_cast<double>(model.photons);
  const double fringe = 0.5 * (1.0 - model.visibility * std::cos(n * phi + n * model.bias_phase));
  const double background = 0.5 * (1.0 - model.visibility * std::cos(n * model.bias_phase));
  return fringe * (1.0 - model.overlap) + background * model.overlap;
}

double expected_counts(const InterferenceModel& model, const PhotonBudget& budget, double phi) {
  return budget.states_per_position * detection_probability(model, phi);
}

std::vector<FringeSample> fringe_scan(const InterferenceModel& model, const PhotonBudget& budget,
                                      std::span<const double> phase_grid) {
  if (phase_grid.empty()) throw std::invalid_argument("fringe_scan needs a nonempty phase grid");
  std::vector<FringeSample> out;
  out.reserve(phase_grid.size());
  for (double phi : phase_grid) out.push_back({phi, expected_counts(model, budget, phi)});
  return out;
}

namespace {

// Residual sum of squares of y ~ a + p cos(w phi) + q sin(w phi) for fixed w,
// with the linear part solved exactly.
double profiled_sse(std::span<const FringeSample> data, double freq,
                    std::vector<double>* coeffs_out = nullptr) {
  const std::size_t m = data.size();
  std::vector<double> ones(m, 1.0), cosc(m), sinc(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    cosc[i] = std::cos(freq * data[i].phase_rad);
    sinc[i] = std::sin(freq * data[i].phase_rad);
    y[i] = data[i].counts;
  }
  double sse = 0.0;
  auto coeffs = numeric::linear_least_squares({ones, cosc, sinc}, y, &sse);
  if (coeffs_out != nullptr) *coeffs_out = std::move(coeffs);
  return sse;
}

}  // namespace

FringeFit fit_visibility(std::span<const FringeSample> data) {
  if (data.size() < 5) throw FitError("fringe fit needs at least 5 samples");
  const auto [min_it, max_it] = std::minmax_element(
      data.begin(), data.end(), [](const auto& a, const auto& b) { return a.counts < b.counts; });
  if (min_it->counts == max_it->counts) throw FitError("fringe fit: data has no modulation");

  // Coarse frequency scan with the linear part profiled out, then a
  // golden-section polish around the best bin.
  constexpr double kFreqLo = 0.25;
  constexpr double kFreqHi = 8.5;
  constexpr double kFreqStep = 0.025;
  double best_freq = kFreqLo;
  double best_sse = profiled_sse(data, kFreqLo);
  for (double f = kFreqLo + kFreqStep; f <= kFreqHi; f += kFreqStep) {
    const double sse = profiled_sse(data, f);
    if (sse < best_sse) {
      best_sse = sse;
      best_freq = f;
    }
  }
  const double freq = numeric::golden_section_minimize(
      [&](double f) { return profiled_sse(data, f); }, std::max(kFreqLo, best_freq - 2 * kFreqStep),
      std::min(kFreqHi, best_freq + 2 * kFreqStep), 1e-10);

  std::vector<double> coeffs;
  const double sse = profiled_sse(data, freq, &coeffs);
  const double offset = coeffs[0];
  const double amplitude = std::hypot(coeffs[1], coeffs[2]);
  const double phase = std::atan2(-coeffs[2], coeffs[1]);

  if (!(offset > 0.0)) throw FitError("fringe fit: nonpositive mean level");
  const std::size_t m = data.size();
  const double residual_rms = std::sqrt(sse / static_cast<double>(m > 3 ? m - 3 : 1));
  // Amplitude standard error for a sinusoid fit is about rms * sqrt(2/m);
  // an amplitude below 4 of those is noise, not a fringe.
  if (amplitude < 4.0 * residual_rms * std::sqrt(2.0 / static_cast<double>(m)))
    throw FitError("fringe fit: no statistically significant modulation");

  const auto [span_min, span_max] = std::minmax_element(
      data.begin(), data.end(),
      [](const auto& a, const auto& b) { return a.phase_rad < b.phase_rad; });
  // A grid over [0, 2 pi) stops one sample short of the full turn, so ask
  // for 90% of a period rather than all of it.
  if ((span_max->phase_rad - span_min->phase_rad) * freq < 2.0 * std::numbers::pi * 0.9)
    throw FitError("fringe fit: data spans less than one fringe period");

  FringeFit fit;
  fit.offset = offset;
  fit.amplitude = amplitude;
  fit.frequency = freq;
  fit.period_rad = 2.0 * std::numbers::pi / freq;
  fit.phase_offset = phase;
  double trough = std::fmod(phase - std::numbers::pi, 2.0 * std::numbers::pi);
  if (trough < 0.0) trough += 2.0 * std::numbers::pi;
  fit.bias_phase = trough / freq;
  fit.visibility = amplitude / offset;
  fit.residual_rms = residual_rms;
  fit.points = m;
  return fit;
}

}  // namespace qdim
