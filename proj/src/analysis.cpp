#include "qdim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qdim/errors.hpp"
#include "qdim/fit.hpp"
#include "qdim/parallel.hpp"
#include "qdim/stats.hpp"

namespace qdim {

namespace {

double visibility_factor(double v) { return std::sqrt(1.0 - std::sqrt(1.0 - v * v)); }

struct LinearStepFit {
  double background = 0.0;
  double amplitude = 0.0;
  double sse = 0.0;
};

// For a fixed step position, C = B + A w(s - s0) is linear; solve it exactly.
LinearStepFit solve_linear_step(std::span<const double> x_um, std::span<const double> counts,
                                const BeamGeometry& geometry, double s0) {
  const std::size_t n = x_um.size();
  std::vector<double> ones(n, 1.0), w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = window_weight(geometry, x_um[i] - s0);
  LinearStepFit fit;
  const auto coeffs = numeric::linear_least_squares({ones, w}, counts, &fit.sse);
  fit.background = coeffs[0];
  fit.amplitude = coeffs[1];
  return fit;
}

}  // namespace

SnrEstimate snr_analytic(const InterferenceModel& model, const PhotonBudget& budget,
                         double differential_phase) {
  const double n = static_cast<double>(model.photons);
  const double x = n * model.bias_phase;
  const double v = model.visibility;
  const double k = budget.states_per_position;
  const double lead = (1.0 - model.overlap) * std::sqrt(0.5 * k) * n * differential_phase;

  const double denom_sq = 1.0 - v * std::cos(x);
  if (std::sin(x) == 0.0 && denom_sq <= 0.0) {
    // V = 1 at zero bias: the 0/0 limit of the ratio is sqrt(2).
    return {lead * std::numbers::sqrt2, true};
  }
  if (denom_sq <= 0.0) throw std::invalid_argument("snr_analytic: nonpositive noise variance");
  if (std::sin(x) == 0.0) return {0.0, false};
  return {lead * v * std::abs(std::sin(x)) / std::sqrt(denom_sq), false};
}

double snr_step_response(const InterferenceModel& model, const PhotonBudget& budget,
                         double differential_phase) {
  const double n = static_cast<double>(model.photons);
  const double v = model.visibility;
  const double k = budget.states_per_position;
  const double p0 = 0.5 * (1.0 - v * std::cos(n * model.bias_phase));
  if (!(p0 > 0.0) || !(k > 0.0))
    throw std::invalid_argument("snr_step_response needs positive background counts");
  const double signal = (1.0 - model.overlap) * 0.5 * k * v *
                        (std::cos(n * model.bias_phase) -
                         std::cos(n * (differential_phase + model.bias_phase)));
  return std::abs(signal) / std::sqrt(k * p0);
}

double snr_max(const InterferenceModel& model, const PhotonBudget& budget,
               double differential_phase) {
  const double n = static_cast<double>(model.photons);
  return (1.0 - model.overlap) * std::sqrt(budget.states_per_position) * n *
         visibility_factor(model.visibility) * differential_phase;
}

double optimal_bias(int photons, double visibility) {
  if (photons < 1) throw std::invalid_argument("optimal_bias needs photons >= 1");
  if (!(visibility > 0.0 && visibility <= 1.0))
    throw std::invalid_argument("optimal_bias needs visibility in (0, 1]");
  const double cos_nphi = (1.0 - std::sqrt(1.0 - visibility * visibility)) / visibility;
  return std::acos(std::clamp(cos_nphi, -1.0, 1.0)) / static_cast<double>(photons);
}

double snr_bias_derivative(const InterferenceModel& model, const PhotonBudget& budget,
                           double differential_phase) {
  const double n = static_cast<double>(model.photons);
  const double x = n * model.bias_phase;
  const double v = model.visibility;
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double denom = 1.0 - v * c;
  if (s == 0.0 || denom <= 0.0)
    throw std::invalid_argument("snr_bias_derivative is undefined at sin(N Phi0) = 0");
  const double lead =
      (1.0 - model.overlap) * std::sqrt(0.5 * budget.states_per_position) * n * differential_phase;
  const double sign = s > 0.0 ? 1.0 : -1.0;
  return lead * v * n * sign * (c * denom - 0.5 * v * s * s) / std::pow(denom, 1.5);
}

double quantum_advantage(double visibility_quantum, double visibility_classical, int photons) {
  if (photons < 1) throw std::invalid_argument("quantum_advantage needs photons >= 1");
  if (!(visibility_quantum > 0.0 && visibility_quantum <= 1.0) ||
      !(visibility_classical > 0.0 && visibility_classical <= 1.0))
    throw std::invalid_argument("quantum_advantage needs visibilities in (0, 1]");
  return std::sqrt(static_cast<double>(photons)) * visibility_factor(visibility_quantum) /
         visibility_factor(visibility_classical);
}

StepCurveFit fit_step_curve(std::span<const double> x_um, std::span<const double> counts,
                            const BeamGeometry& geometry, const AnalysisOptions& options) {
  const std::size_t n = x_um.size();
  if (n != counts.size()) throw std::invalid_argument("positions and counts differ in length");
  if (n < 10) throw FitError("step fit needs at least 10 positions");
  const auto [cmin, cmax] = std::minmax_element(counts.begin(), counts.end());
  if (*cmin == *cmax) throw FitError("step fit: counts are flat");

  // Coarse grid over the step position with the linear part profiled out,
  // then a golden-section polish around the best cell.
  const double lo = x_um.front();
  const double hi = x_um.back();
  const double coarse = std::min(geometry.separation_um / 8.0, (hi - lo) / 50.0);
  double best_s0 = lo;
  double best_sse = solve_linear_step(x_um, counts, geometry, lo).sse;
  for (double s0 = lo + coarse; s0 <= hi; s0 += coarse) {
    const double sse = solve_linear_step(x_um, counts, geometry, s0).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_s0 = s0;
    }
  }
  const double s0 = numeric::golden_section_minimize(
      [&](double s) { return solve_linear_step(x_um, counts, geometry, s).sse; },
      std::max(lo, best_s0 - coarse), std::min(hi, best_s0 + coarse),
      options.position_tolerance_um, options.max_iterations);
  const LinearStepFit linear = solve_linear_step(x_um, counts, geometry, s0);

  // Covariance of (B, A, s0) from the Jacobian at the optimum.
  std::vector<double> jb(n, 1.0), ja(n), js(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = x_um[i] - s0;
    ja[i] = window_weight(geometry, u);
    js[i] = -linear.amplitude * window_weight_derivative(geometry, u);
  }
  std::vector<double> jtj(9, 0.0);
  const std::vector<std::span<const double>> jac = {jb, ja, js};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += jac[r][i] * jac[c][i];
      jtj[r * 3 + c] = s;
    }
  }
  const double dof = static_cast<double>(n > 3 ? n - 3 : 1);
  const double variance = linear.sse / dof;
  double cov_diag[3] = {0.0, 0.0, 0.0};
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> e(3, 0.0);
    e[c] = 1.0;
    try {
      const auto col = numeric::solve_dense(jtj, e, 3);
      cov_diag[c] = col[c] * variance;
    } catch (const FitError&) {
      // Singular at amplitude 0 (the s0 column vanishes); leave 0.
    }
  }

  StepCurveFit fit;
  fit.background = linear.background;
  fit.amplitude = linear.amplitude;
  fit.position_um = s0;
  fit.background_sigma = std::sqrt(std::max(0.0, cov_diag[0]));
  fit.amplitude_sigma = std::sqrt(std::max(0.0, cov_diag[1]));
  fit.position_sigma_um = std::sqrt(std::max(0.0, cov_diag[2]));
  fit.sse = linear.sse;
  fit.points = n;
  return fit;
}

SnrReport fit_step(const ScanRecord& record, const BeamGeometry& geometry,
                   const AnalysisOptions& options) {
  if (record.is_2d) throw std::invalid_argument("fit_step expects a 1D scan record");
  const std::size_t n = record.x_um.size();
  std::vector<double> counts(n);
  for (std::size_t i = 0; i < n; ++i) counts[i] = static_cast<double>(record.sampled_counts[i]);
  const StepCurveFit curve = fit_step_curve(record.x_um, counts, geometry, options);

  SnrReport report;
  report.background = curve.background;
  report.background_sigma = curve.background_sigma;
  report.amplitude = curve.amplitude;
  report.amplitude_sigma = curve.amplitude_sigma;
  report.step_position_um = curve.position_um;
  report.step_position_sigma_um = curve.position_sigma_um;

  const double peak_weight = window_weight(geometry, 0.0);
  report.signal = std::abs(curve.amplitude) * peak_weight;
  report.signal_sigma = curve.amplitude_sigma * peak_weight;

  // Noise: rms deviation of background-region counts from the fitted level.
  std::vector<double> background_counts;
  for (std::size_t i = 0; i < n; ++i) {
    if (window_weight(geometry, record.x_um[i] - curve.position_um) <
        options.background_weight_threshold)
      background_counts.push_back(counts[i]);
  }
  report.background_points = background_counts.size();
  if (background_counts.size() < 2)
    throw FitError("step fit: no background region beyond the step window");
  report.noise = rms_about(background_counts, curve.background);
  if (!(report.noise > 0.0)) throw FitError("step fit: zero background noise");
  report.snr = report.signal / report.noise;
  report.snr_sigma = report.signal_sigma / report.noise;

  // Invert the fringe formula at the record's operating point:
  // A = -kV/2 [cos(N(dphi + Phi0)) - cos(N Phi0)].
  const double n_photons = static_cast<double>(record.model.photons);
  const double k = record.budget.states_per_position;
  const double v = record.model.visibility;
  const double cos_bias = std::cos(n_photons * record.model.bias_phase);
  if (k > 0.0 && v > 0.0) {
    const double cos_shifted = std::clamp(cos_bias - 2.0 * curve.amplitude / (k * v), -1.0, 1.0);
    report.step_phase_rad =
        (std::acos(cos_shifted) - n_photons * record.model.bias_phase) / n_photons;
    const double sin_shifted = std::sqrt(std::max(0.0, 1.0 - cos_shifted * cos_shifted));
    if (sin_shifted > 0.0) {
      report.step_phase_sigma_rad =
          2.0 * report.amplitude_sigma / (n_photons * k * v * sin_shifted);
    }
    report.step_height_nm = phase_to_height(report.step_phase_rad, record.material);
    report.step_height_sigma_nm = phase_to_height(report.step_phase_sigma_rad, record.material);
  }
  return report;
}

std::vector<BiasSweepPoint> bias_sweep(const SampleProfile& profile, const ScanConfig& base_config,
                                       std::span<const double> bias_grid, int seeds_per_point,
                                       const AnalysisOptions& options) {
  if (bias_grid.empty()) throw std::invalid_argument("bias sweep needs a nonempty grid");
  if (seeds_per_point < 1) throw std::invalid_argument("bias sweep needs seeds_per_point >= 1");
  const auto* step = std::get_if<StepProfile>(&profile.shape);
  if (step == nullptr) throw std::invalid_argument("bias sweep expects a step profile");

  const double dphi = height_to_phase(step->height_nm, profile.material);
  const double xi = overlap_xi(base_config.geometry);
  const std::size_t n_bias = bias_grid.size();
  const std::size_t n_cells = n_bias * static_cast<std::size_t>(seeds_per_point);

  // One slot per (bias, seed) cell keeps the aggregation independent of
  // worker scheduling. NaN marks a failed fit.
  std::vector<double> cell_snr(n_cells, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_cells, base_config.threads, [&](std::size_t cell) {
    const std::size_t bias_index = cell / static_cast<std::size_t>(seeds_per_point);
    ScanConfig config = base_config;
    config.threads = 1;
    config.model = InterferenceModel(base_config.model.photons, base_config.model.visibility,
                                     bias_grid[bias_index], base_config.model.overlap);
    config.rng_seed = mix64(base_config.rng_seed ^ mix64(cell + 1));
    try {
      const ScanRecord record = scan_1d(profile, config);
      cell_snr[cell] = fit_step(record, config.geometry, options).snr;
    } catch (const FitError&) {
      // leave NaN; counted as a failed scan below
    }
  });

  std::vector<BiasSweepPoint> points;
  points.reserve(n_bias);
  for (std::size_t b = 0; b < n_bias; ++b) {
    std::vector<double> ok;
    ok.reserve(static_cast<std::size_t>(seeds_per_point));
    for (int s = 0; s < seeds_per_point; ++s) {
      const double snr = cell_snr[b * static_cast<std::size_t>(seeds_per_point) +
                                 static_cast<std::size_t>(s)];
      if (snr == snr) ok.push_back(snr);
    }
    BiasSweepPoint point;
    point.bias_phase = bias_grid[b];
    point.scans_ok = ok.size();
    point.scans_failed = static_cast<std::size_t>(seeds_per_point) - ok.size();
    point.empirical_snr_mean = mean(ok);
    point.empirical_snr_stddev = sample_stddev(ok);
    point.states_per_position = base_config.budget.states_per_position;
    const InterferenceModel analytic_model(base_config.model.photons,
                                           base_config.model.visibility, bias_grid[b], xi);
    point.analytic_snr = snr_analytic(analytic_model, base_config.budget, dphi).value;
    points.push_back(point);
  }
  return points;
}

}  // namespace qdim
