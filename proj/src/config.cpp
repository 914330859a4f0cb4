#include "qdim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "qdim/errors.hpp"
#include "qdim/io.hpp"

namespace qdim {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw ConfigError("unknown config key: " + (path.empty() ? "" : path + ".") + item.key());
  }
}

template <typename T>
void read_value(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + (path.empty() ? "" : path + ".") + key +
                      "' has the wrong type");
  }
}

void parse_probe(const json& obj, const std::string& path, ProbeConfig& probe) {
  check_keys(obj, path, {"photons", "visibility", "bias_phase", "states_per_position"});
  read_value(obj, path, "photons", probe.photons);
  read_value(obj, path, "visibility", probe.visibility);
  read_value(obj, path, "bias_phase", probe.bias_phase);
  read_value(obj, path, "states_per_position", probe.states_per_position);
}

json parse_override_value(const std::string& text) {
  const json parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded()) return parsed;
  return json(text);  // unquoted strings
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const std::string& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects key=value, got: " + entry);
    const std::string path = entry.substr(0, eq);
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string token = path.substr(start, dot - start);
      if (token.empty()) throw ConfigError("--set has an empty path segment: " + entry);
      if (dot == std::string::npos) {
        (*node)[token] = parse_override_value(entry.substr(eq + 1));
        break;
      }
      node = &(*node)[token];
      start = dot + 1;
    }
  }
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, "",
             {"seed", "threads", "output_dir", "quantum", "classical", "geometry", "material",
              "sample", "scan", "scan_probe", "axis", "analysis", "fringe", "sweep", "reproduce"});
  ExperimentConfig config;
  read_value(doc, "", "seed", config.seed);
  read_value(doc, "", "threads", config.threads);
  read_value(doc, "", "output_dir", config.output_dir);
  if (doc.contains("quantum")) parse_probe(doc.at("quantum"), "quantum", config.quantum);
  if (doc.contains("classical")) parse_probe(doc.at("classical"), "classical", config.classical);

  if (doc.contains("geometry")) {
    const auto& g = doc.at("geometry");
    check_keys(g, "geometry", {"sigma_um", "separation_um"});
    double sigma = config.geometry.sigma_um;
    double separation = config.geometry.separation_um;
    read_value(g, "geometry", "sigma_um", sigma);
    read_value(g, "geometry", "separation_um", separation);
    try {
      config.geometry = BeamGeometry(sigma, separation);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("geometry: ") + e.what());
    }
  }
  if (doc.contains("material")) {
    const auto& m = doc.at("material");
    check_keys(m, "material", {"refractive_index", "wavelength_nm", "passes"});
    double n = config.material.refractive_index;
    double lambda = config.material.wavelength_nm;
    int passes = config.material.passes;
    read_value(m, "material", "refractive_index", n);
    read_value(m, "material", "wavelength_nm", lambda);
    read_value(m, "material", "passes", passes);
    try {
      config.material = MaterialModel(n, lambda, passes);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("material: ") + e.what());
    }
  }
  if (doc.contains("sample")) {
    const auto& s = doc.at("sample");
    check_keys(s, "sample",
               {"mode", "step_height_nm", "step_position_um", "heightmap_file", "q_rows", "q_cols",
                "q_pitch_um", "q_height_nm"});
    read_value(s, "sample", "mode", config.sample.mode);
    read_value(s, "sample", "step_height_nm", config.sample.step.height_nm);
    read_value(s, "sample", "step_position_um", config.sample.step.position_um);
    read_value(s, "sample", "heightmap_file", config.sample.heightmap_file);
    read_value(s, "sample", "q_rows", config.sample.q_rows);
    read_value(s, "sample", "q_cols", config.sample.q_cols);
    read_value(s, "sample", "q_pitch_um", config.sample.q_pitch_um);
    read_value(s, "sample", "q_height_nm", config.sample.q_height_nm);
  }
  if (doc.contains("scan")) {
    const auto& s = doc.at("scan");
    check_keys(s, "scan", {"start_um", "stop_um", "step_um"});
    read_value(s, "scan", "start_um", config.scan.start_um);
    read_value(s, "scan", "stop_um", config.scan.stop_um);
    read_value(s, "scan", "step_um", config.scan.step_um);
  }
  read_value(doc, "", "scan_probe", config.scan_probe);
  if (doc.contains("axis")) {
    std::string axis;
    read_value(doc, "", "axis", axis);
    if (axis != "x" && axis != "y") throw ConfigError("axis must be 'x' or 'y'");
    config.axis = axis == "x" ? ScanAxis::x : ScanAxis::y;
  }
  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    check_keys(a, "analysis", {"background_weight_threshold"});
    read_value(a, "analysis", "background_weight_threshold",
               config.analysis.background_weight_threshold);
  }
  if (doc.contains("fringe")) {
    const auto& f = doc.at("fringe");
    check_keys(f, "fringe", {"points", "states_per_position"});
    read_value(f, "fringe", "points", config.fringe.points);
    read_value(f, "fringe", "states_per_position", config.fringe.states_per_position);
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    check_keys(s, "sweep",
               {"points", "seeds_per_point", "quantum_total_photons", "classical_total_photons"});
    read_value(s, "sweep", "points", config.sweep.points);
    read_value(s, "sweep", "seeds_per_point", config.sweep.seeds_per_point);
    read_value(s, "sweep", "quantum_total_photons", config.sweep.quantum_total_photons);
    read_value(s, "sweep", "classical_total_photons", config.sweep.classical_total_photons);
  }
  if (doc.contains("reproduce")) {
    const auto& r = doc.at("reproduce");
    check_keys(r, "reproduce", {"snr_seeds", "height_seeds"});
    read_value(r, "reproduce", "snr_seeds", config.reproduce.snr_seeds);
    read_value(r, "reproduce", "height_seeds", config.reproduce.height_seeds);
  }
  return config;
}

void validate(const ExperimentConfig& config) {
  auto check_probe = [](const ProbeConfig& probe, const char* name) {
    if (probe.photons < 1) throw ConfigError(std::string(name) + ".photons must be >= 1");
    if (!(probe.visibility >= 0.0 && probe.visibility <= 1.0))
      throw ConfigError(std::string(name) + ".visibility must be in [0, 1]");
    if (!(probe.states_per_position >= 0.0))
      throw ConfigError(std::string(name) + ".states_per_position must be >= 0");
  };
  check_probe(config.quantum, "quantum");
  check_probe(config.classical, "classical");
  if (config.sample.mode != "step1d" && config.sample.mode != "heightmap2d")
    throw ConfigError("sample.mode must be 'step1d' or 'heightmap2d'");
  if (config.scan_probe != "quantum" && config.scan_probe != "classical")
    throw ConfigError("scan_probe must be 'quantum' or 'classical'");
  if (!(config.scan.step_um > 0.0)) throw ConfigError("scan.step_um must be > 0");
  if (!(config.scan.start_um < config.scan.stop_um))
    throw ConfigError("scan.start_um must be < scan.stop_um");
  if (config.fringe.points < 5) throw ConfigError("fringe.points must be >= 5");
  if (!(config.fringe.states_per_position >= 0.0))
    throw ConfigError("fringe.states_per_position must be >= 0");
  if (config.sweep.points < 1) throw ConfigError("sweep.points must be >= 1");
  if (config.sweep.seeds_per_point < 1) throw ConfigError("sweep.seeds_per_point must be >= 1");
  if (config.reproduce.snr_seeds < 2) throw ConfigError("reproduce.snr_seeds must be >= 2");
  if (config.reproduce.height_seeds < 2) throw ConfigError("reproduce.height_seeds must be >= 2");
  if (!(config.analysis.background_weight_threshold > 0.0 &&
        config.analysis.background_weight_threshold < 1.0))
    throw ConfigError("analysis.background_weight_threshold must be in (0, 1)");
}

}  // namespace

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  apply_overrides(doc, overrides);
  ExperimentConfig config = parse_config(doc);
  validate(config);
  return config;
}

ExperimentConfig default_config(const std::vector<std::string>& overrides) {
  json doc = json::object();
  apply_overrides(doc, overrides);
  ExperimentConfig config = parse_config(doc);
  validate(config);
  return config;
}

std::string canonical_config_json(const ExperimentConfig& config) {
  // Fingerprint of the experiment itself: where outputs land and how many
  // workers run do not change any result, so they stay out of the hash.
  json doc;
  doc["seed"] = config.seed;
  auto probe_json = [](const ProbeConfig& p) {
    return json{{"photons", p.photons},
                {"visibility", p.visibility},
                {"bias_phase", p.bias_phase},
                {"states_per_position", p.states_per_position}};
  };
  doc["quantum"] = probe_json(config.quantum);
  doc["classical"] = probe_json(config.classical);
  doc["geometry"] = {{"sigma_um", config.geometry.sigma_um},
                     {"separation_um", config.geometry.separation_um}};
  doc["material"] = {{"refractive_index", config.material.refractive_index},
                     {"wavelength_nm", config.material.wavelength_nm},
                     {"passes", config.material.passes}};
  doc["sample"] = {{"mode", config.sample.mode},
                   {"step_height_nm", config.sample.step.height_nm},
                   {"step_position_um", config.sample.step.position_um},
                   {"heightmap_file", config.sample.heightmap_file},
                   {"q_rows", config.sample.q_rows},
                   {"q_cols", config.sample.q_cols},
                   {"q_pitch_um", config.sample.q_pitch_um},
                   {"q_height_nm", config.sample.q_height_nm}};
  doc["scan"] = {{"start_um", config.scan.start_um},
                 {"stop_um", config.scan.stop_um},
                 {"step_um", config.scan.step_um}};
  doc["scan_probe"] = config.scan_probe;
  doc["axis"] = config.axis == ScanAxis::x ? "x" : "y";
  doc["analysis"] = {{"background_weight_threshold", config.analysis.background_weight_threshold}};
  doc["fringe"] = {{"points", config.fringe.points},
                   {"states_per_position", config.fringe.states_per_position}};
  doc["sweep"] = {{"points", config.sweep.points},
                  {"seeds_per_point", config.sweep.seeds_per_point},
                  {"quantum_total_photons", config.sweep.quantum_total_photons},
                  {"classical_total_photons", config.sweep.classical_total_photons}};
  doc["reproduce"] = {{"snr_seeds", config.reproduce.snr_seeds},
                      {"height_seeds", config.reproduce.height_seeds}};
  return doc.dump();
}

InterferenceModel probe_model(const ProbeConfig& probe, const BeamGeometry& geometry) {
  return InterferenceModel(probe.photons, probe.visibility, probe.bias_phase,
                           overlap_xi(geometry));
}

std::vector<double> scan_positions(const ScanRangeConfig& range) {
  std::vector<double> positions;
  const double epsilon = 1e-9 * range.step_um;
  for (double x = range.start_um; x <= range.stop_um + epsilon; x += range.step_um)
    positions.push_back(x);
  return positions;
}

SampleProfile make_sample(const ExperimentConfig& config) {
  SampleProfile profile;
  profile.material = config.material;
  if (config.sample.mode == "step1d") {
    profile.shape = config.sample.step;
    return profile;
  }
  if (!config.sample.heightmap_file.empty()) {
    if (!std::filesystem::exists(config.sample.heightmap_file))
      throw ConfigError("heightmap file not found: " + config.sample.heightmap_file);
    profile.shape = read_heightmap_csv(config.sample.heightmap_file);
    return profile;
  }
  profile.shape = make_q_relief(config.sample.q_rows, config.sample.q_cols,
                                config.sample.q_pitch_um, config.sample.q_height_nm);
  return profile;
}

}  // namespace qdim
