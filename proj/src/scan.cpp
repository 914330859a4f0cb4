#include "qdim/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qdim/parallel.hpp"

namespace qdim {

namespace {

void check_positions(const std::vector<double>& xs, const char* label) {
  if (xs.empty()) throw std::invalid_argument(std::string(label) + " positions must be nonempty");
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(xs[i] < xs[i + 1]))
      throw std::invalid_argument(std::string(label) + " positions must be strictly increasing");
  }
  for (double x : xs) {
    if (!std::isfinite(x)) throw std::invalid_argument("scan positions must be finite");
  }
}

double step_probability(const StepProfile& step, const MaterialModel& material,
                        const BeamGeometry& geometry, const InterferenceModel& model,
                        double x_um) {
  const double dphi = height_to_phase(step.height_nm, material);
  const double w = window_weight(geometry, step.position_um - x_um);
  const double n = static_cast<double>(model.photons);
  const double shifted = std::cos(n * (dphi + model.bias_phase));
  const double flat = std::cos(n * model.bias_phase);
  return 0.5 * (1.0 - model.visibility * (w * shifted + (1.0 - w) * flat));
}

// Mean map height under a Gaussian footprint centered at (cx, cy), with the
// density integrated exactly over each pixel cell. Weights spilling past the
// map edge are renormalized away.
double footprint_mean_height(const HeightMap& map, const BeamGeometry& geometry, double cx,
                             double cy) {
  const double sigma = geometry.sigma_um;
  const double pitch = map.pitch_um;
  const double half = 0.5 * pitch;
  const double reach = 6.0 * sigma + pitch;

  const auto clamp_index = [&](double coord, std::size_t count) {
    const double idx = coord / pitch;
    const auto lo = static_cast<std::ptrdiff_t>(std::floor(idx));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        lo, 0, static_cast<std::ptrdiff_t>(count) - 1));
  };
  const std::size_t c0 = clamp_index(cx - reach, map.cols);
  const std::size_t c1 = clamp_index(cx + reach, map.cols);
  const std::size_t r0 = clamp_index(cy - reach, map.rows);
  const std::size_t r1 = clamp_index(cy + reach, map.rows);

  std::vector<double> wx(c1 - c0 + 1), wy(r1 - r0 + 1);
  for (std::size_t c = c0; c <= c1; ++c) {
    const double x = c * pitch;
    wx[c - c0] = normal_cdf((x + half - cx) / sigma) - normal_cdf((x - half - cx) / sigma);
  }
  for (std::size_t r = r0; r <= r1; ++r) {
    const double y = r * pitch;
    wy[r - r0] = normal_cdf((y + half - cy) / sigma) - normal_cdf((y - half - cy) / sigma);
  }

  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t r = r0; r <= r1; ++r) {
    const double wrow = wy[r - r0];
    if (wrow == 0.0) continue;
    for (std::size_t c = c0; c <= c1; ++c) {
      const double w = wrow * wx[c - c0];
      total += w;
      weighted += w * map.at(r, c);
    }
  }
  return total > 0.0 ? weighted / total : 0.0;
}

std::string describe(const SampleProfile& profile) {
  std::ostringstream os;
  if (const auto* step = std::get_if<StepProfile>(&profile.shape)) {
    os << "step1d height_nm=" << step->height_nm << " position_um=" << step->position_um;
  } else {
    const auto& map = std::get<HeightMap>(profile.shape);
    os << "heightmap2d " << map.rows << "x" << map.cols << " pitch_um=" << map.pitch_um;
  }
  return os.str();
}

}  // namespace

void HeightMap::validate() const {
  if (rows == 0 || cols == 0) throw std::invalid_argument("height map must be nonempty");
  if (!(pitch_um > 0.0)) throw std::invalid_argument("height map pitch must be > 0");
  if (heights_nm.size() != rows * cols)
    throw std::invalid_argument("height map data size does not match rows*cols");
  for (double h : heights_nm) {
    if (!std::isfinite(h)) throw std::invalid_argument("height map values must be finite");
  }
}

double heightmap_differential_phase(const HeightMap& map, const MaterialModel& material,
                                    const BeamGeometry& geometry, double x_um, double y_um,
                                    ScanAxis axis) {
  const double half_sep = 0.5 * geometry.separation_um;
  const double dx = axis == ScanAxis::x ? half_sep : 0.0;
  const double dy = axis == ScanAxis::y ? half_sep : 0.0;
  const double mean_plus = footprint_mean_height(map, geometry, x_um + dx, y_um + dy);
  const double mean_minus = footprint_mean_height(map, geometry, x_um - dx, y_um - dy);
  // Phase is linear in height, so the footprint-mean phase is the phase of
  // the footprint-mean height.
  return height_to_phase(mean_plus - mean_minus, material);
}

double differential_probability(const SampleProfile& profile, const BeamGeometry& geometry,
                                const InterferenceModel& model, double x_um, double y_um,
                                ScanAxis axis) {
  if (const auto* step = std::get_if<StepProfile>(&profile.shape)) {
    return step_probability(*step, profile.material, geometry, model, x_um);
  }
  const auto& map = std::get<HeightMap>(profile.shape);
  map.validate();
  if (x_um < 0.0 || x_um > map.width_um() || y_um < 0.0 || y_um > map.height_um())
    throw std::out_of_range("scan position outside the height map domain");
  const double dphi = heightmap_differential_phase(map, profile.material, geometry, x_um, y_um, axis);
  const double n = static_cast<double>(model.photons);
  return 0.5 * (1.0 - model.visibility * std::cos(n * (dphi + model.bias_phase)));
}

std::int64_t sample_counts(double expected, RandomStream& stream) {
  return stream.next_poisson(expected);
}

ScanRecord scan_1d(const SampleProfile& profile, const ScanConfig& config) {
  if (!std::holds_alternative<StepProfile>(profile.shape))
    throw std::invalid_argument("scan_1d expects a step profile");
  check_positions(config.positions_x, "x");

  ScanRecord record;
  record.model = config.model;
  record.geometry = config.geometry;
  record.budget = config.budget;
  record.material = profile.material;
  record.rng_seed = config.rng_seed;
  record.axis = config.axis;
  record.sample_summary = describe(profile);
  record.is_2d = false;

  const std::size_t n = config.positions_x.size();
  record.x_um = config.positions_x;
  record.expected_probability.resize(n);
  record.expected_counts.resize(n);
  record.sampled_counts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p =
        differential_probability(profile, config.geometry, config.model, config.positions_x[i]);
    const double mean = config.budget.states_per_position * p;
    record.expected_probability[i] = p;
    record.expected_counts[i] = mean;
    RandomStream stream(config.rng_seed, i);
    record.sampled_counts[i] = sample_counts(mean, stream);
  }
  return record;
}

ScanRecord scan_2d(const SampleProfile& profile, const ScanConfig& config) {
  if (!std::holds_alternative<HeightMap>(profile.shape))
    throw std::invalid_argument("scan_2d expects a height map profile");
  check_positions(config.positions_x, "x");
  check_positions(config.positions_y, "y");

  ScanRecord record;
  record.model = config.model;
  record.geometry = config.geometry;
  record.budget = config.budget;
  record.material = profile.material;
  record.rng_seed = config.rng_seed;
  record.axis = config.axis;
  record.sample_summary = describe(profile);
  record.is_2d = true;
  record.rows = config.positions_y.size();
  record.cols = config.positions_x.size();

  const std::size_t total = record.rows * record.cols;
  record.x_um.resize(total);
  record.y_um.resize(total);
  record.expected_probability.resize(total);
  record.expected_counts.resize(total);
  record.sampled_counts.resize(total);

  parallel_for(total, config.threads, [&](std::size_t i) {
    const std::size_t r = i / record.cols;
    const std::size_t c = i % record.cols;
    const double x = config.positions_x[c];
    const double y = config.positions_y[r];
    const double p =
        differential_probability(profile, config.geometry, config.model, x, y, config.axis);
    const double mean = config.budget.states_per_position * p;
    record.x_um[i] = x;
    record.y_um[i] = y;
    record.expected_probability[i] = p;
    record.expected_counts[i] = mean;
    RandomStream stream(config.rng_seed, i);
    record.sampled_counts[i] = sample_counts(mean, stream);
  });
  return record;
}

HeightMap make_q_relief(std::size_t rows, std::size_t cols, double pitch_um, double height_nm) {
  HeightMap map;
  map.rows = rows;
  map.cols = cols;
  map.pitch_um = pitch_um;
  map.heights_nm.assign(rows * cols, 0.0);
  map.validate();

  const double w = map.width_um();
  const double h = map.height_um();
  const double cx = 0.5 * w;
  const double cy = 0.5 * h;
  const double extent = std::min(w, h);
  const double outer = 0.33 * extent;
  const double inner = 0.21 * extent;
  const double tail_half_width = 0.045 * extent;
  const double tail_start = 0.5 * inner;
  const double tail_end = 0.46 * extent;

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = c * pitch_um - cx;
      const double y = r * pitch_um - cy;
      const double radius = std::hypot(x, y);
      const bool ring = radius <= outer && radius >= inner;
      // Tail along the +x,+y diagonal: u is the along-tail coordinate, v the
      // transverse offset.
      const double u = (x + y) / std::numbers::sqrt2;
      const double v = (x - y) / std::numbers::sqrt2;
      const bool tail = u >= tail_start && u <= tail_end && std::abs(v) <= tail_half_width;
      if (ring || tail) map.heights_nm[r * cols + c] = height_nm;
    }
  }
  return map;
}

}  // namespace qdim
