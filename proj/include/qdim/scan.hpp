#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qdim/interference.hpp"
#include "qdim/optics.hpp"
#include "qdim/rng.hpp"

namespace qdim {

/// Ideal 1D relief step: height 0 for x < position, `height_nm` for
/// x > position, edge normal along the scan axis.
struct StepProfile {
  double height_nm = 0.0;
  double position_um = 0.0;
};

/// Rectangular height map, row-major, pixel centers at
/// (col * pitch, row * pitch). Heights in nm.
struct HeightMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double pitch_um = 1.0;
  std::vector<double> heights_nm;

  double at(std::size_t row, std::size_t col) const { return heights_nm[row * cols + col]; }
  double width_um() const { return (cols - 1) * pitch_um; }
  double height_um() const { return (rows - 1) * pitch_um; }
  void validate() const;
};

struct SampleProfile {
  std::variant<StepProfile, HeightMap> shape;
  MaterialModel material;
};

enum class ScanAxis { x, y };

struct ScanConfig {
  InterferenceModel model;  // model.overlap is ignored here: geometry supplies the weights
  BeamGeometry geometry;
  PhotonBudget budget;
  std::vector<double> positions_x;  // strictly increasing, micrometers
  std::vector<double> positions_y;  // empty for 1D scans
  std::uint64_t rng_seed = 0;
  ScanAxis axis = ScanAxis::x;  // beam-separation (differential) direction
  unsigned threads = 1;
};

/// One simulated scan: per-position expectations and Poisson-sampled counts,
/// plus everything needed to interpret the numbers later.
struct ScanRecord {
  InterferenceModel model;
  BeamGeometry geometry;
  PhotonBudget budget;
  MaterialModel material;
  std::uint64_t rng_seed = 0;
  ScanAxis axis = ScanAxis::x;
  std::string sample_summary;

  bool is_2d = false;
  std::size_t rows = 0;  // 2D only
  std::size_t cols = 0;

  // Row-major for 2D; x/y give the position of every sample.
  std::vector<double> x_um;
  std::vector<double> y_um;
  std::vector<double> expected_probability;
  std::vector<double> expected_counts;
  std::vector<std::int64_t> sampled_counts;
};

/// Detection probability with the sample in place. For a step profile the
/// two-beam window splits the fringe into a phase-shifted and an unshifted
/// share:
///   P = (1 - V [w cos(N(dphi + Phi0)) + (1 - w) cos(N Phi0)]) / 2,
/// with w = window_weight(step_position - x). For a height map each beam
/// sees the Gaussian-footprint mean height of the map under it (cell
/// integrated weights), and the differential phase of the two displaced
/// footprints feeds the plain fringe formula. Height-map positions must lie
/// inside the map domain (throws std::out_of_range).
double differential_probability(const SampleProfile& profile, const BeamGeometry& geometry,
                                const InterferenceModel& model, double x_um, double y_um = 0.0,
                                ScanAxis axis = ScanAxis::x);

/// Footprint-mean differential phase for a height map at one position.
double heightmap_differential_phase(const HeightMap& map, const MaterialModel& material,
                                    const BeamGeometry& geometry, double x_um, double y_um,
                                    ScanAxis axis);

/// Poisson count draw with the given expectation.
std::int64_t sample_counts(double expected, RandomStream& stream);

/// Simulate a 1D line scan of a step profile. One independent RNG stream per
/// position, split from (seed, position index), so records are bit-identical
/// for any execution order.
ScanRecord scan_1d(const SampleProfile& profile, const ScanConfig& config);

/// Simulate a 2D raster scan of a height map. Positions may run on parallel
/// workers; results are identical for any thread count.
ScanRecord scan_2d(const SampleProfile& profile, const ScanConfig& config);

/// Synthetic "Q" relief: a blocky annulus plus tail raised `height_nm` above
/// the substrate. Stands in for the lithographed test target.
HeightMap make_q_relief(std::size_t rows, std::size_t cols, double pitch_um, double height_nm);

}  // namespace qdim
