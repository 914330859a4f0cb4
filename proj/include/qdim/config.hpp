#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdim/analysis.hpp"
#include "qdim/optics.hpp"
#include "qdim/scan.hpp"

namespace qdim {

/// One probe light source: N-photon states at a chosen operating point.
struct ProbeConfig {
  int photons = 1;
  double visibility = 1.0;
  double bias_phase = 0.0;
  double states_per_position = 0.0;
};

/// Sample description. Exactly one of step / heightmap_file / q_relief is
/// active, selected by `mode`.
struct SampleConfig {
  std::string mode = "step1d";  // "step1d" or "heightmap2d"
  StepProfile step{17.3, 0.0};
  std::string heightmap_file;  // heightmap2d from file when nonempty
  std::size_t q_rows = 48;     // otherwise a generated Q relief
  std::size_t q_cols = 48;
  double q_pitch_um = 5.0;
  double q_height_nm = 17.3;
};

struct ScanRangeConfig {
  double start_um = -150.0;
  double stop_um = 150.0;
  double step_um = 5.0;
};

struct FringeConfig {
  int points = 72;
  double states_per_position = 920.0;
};

struct SweepConfig {
  int points = 12;
  int seeds_per_point = 60;
  double quantum_total_photons = 1150.0;
  double classical_total_photons = 1299.0;
};

struct ReproduceConfig {
  int snr_seeds = 500;
  int height_seeds = 200;
};

/// Everything a command needs, with defaults matching the reference
/// experiment. Parsed strictly: unknown keys abort before any computation.
struct ExperimentConfig {
  std::uint64_t seed = 20260808;
  unsigned threads = 0;  // 0 = all cores
  std::string output_dir = "out";

  ProbeConfig quantum{2, 0.952, 0.41, 460.0};
  ProbeConfig classical{1, 0.971, 0.66, 920.0};
  BeamGeometry geometry{11.25, 45.0};
  MaterialModel material{1.5107, 810.0, 1};
  SampleConfig sample;
  ScanRangeConfig scan;
  std::string scan_probe = "quantum";  // which probe cmd_scan uses
  ScanAxis axis = ScanAxis::x;
  AnalysisOptions analysis;
  FringeConfig fringe;
  SweepConfig sweep;
  ReproduceConfig reproduce;
};

/// Load a config file (JSON) over the defaults. Missing keys keep their
/// defaults; unknown keys throw ConfigError with the offending path.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

/// Defaults plus `--set key=value` overrides (dotted paths).
ExperimentConfig default_config(const std::vector<std::string>& overrides = {});

/// Canonical serialization of the effective config; hashing it gives the
/// config fingerprint echoed into every output file.
std::string canonical_config_json(const ExperimentConfig& config);

/// Build the probe's interference model with the geometry-derived overlap.
InterferenceModel probe_model(const ProbeConfig& probe, const BeamGeometry& geometry);

/// Scan positions from the configured range (inclusive of both ends).
std::vector<double> scan_positions(const ScanRangeConfig& range);

/// Materialize the configured sample (loads or generates height maps).
SampleProfile make_sample(const ExperimentConfig& config);

}  // namespace qdim
