#include "qdim/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qdim/errors.hpp"

namespace qdim {

namespace {

constexpr const char* kScanFormatId = "qdim scan v1";
constexpr const char* kHeightmapFormatId = "qdim heightmap v1";
constexpr const char* kFringeFormatId = "qdim fringe v1";
constexpr const char* kSnrFormatId = "qdim snr report v1";
constexpr const char* kSweepFormatId = "qdim bias sweep v1";

constexpr const char* kScanColumns1d = "x_um,expected_p,expected_counts,sampled_counts";
constexpr const char* kScanColumns2d = "x_um,y_um,expected_p,expected_counts,sampled_counts";

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open: " + path);
  return in;
}

void write_header(std::ofstream& out, const char* format_id, const MetadataEntries& extra) {
  out << "# " << format_id << "\n";
  for (const auto& [key, value] : extra) out << "# " << key << "=" << value << "\n";
}

struct ParsedCsv {
  std::string format_id;
  std::map<std::string, std::string> metadata;
  std::vector<std::vector<std::string>> rows;  // raw fields
  std::vector<std::size_t> row_numbers;        // 1-based line numbers
};

ParsedCsv parse_csv(const std::string& path) {
  auto in = open_for_read(path);
  ParsedCsv parsed;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        if (parsed.format_id.empty()) parsed.format_id = body;
      } else {
        parsed.metadata[body.substr(0, eq)] = body.substr(eq + 1);
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    parsed.rows.push_back(std::move(fields));
    parsed.row_numbers.push_back(line_number);
  }
  return parsed;
}

double meta_double(const ParsedCsv& csv, const std::string& key) {
  const auto it = csv.metadata.find(key);
  if (it == csv.metadata.end()) throw SchemaError("missing header key: " + key);
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("header key '" + key + "' is not a number: " + it->second);
  }
}

std::string meta_string(const ParsedCsv& csv, const std::string& key) {
  const auto it = csv.metadata.find(key);
  if (it == csv.metadata.end()) throw SchemaError("missing header key: " + key);
  return it->second;
}

std::uint64_t meta_u64(const ParsedCsv& csv, const std::string& key) {
  const std::string text = meta_string(csv, key);
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("header key '" + key + "' is not an unsigned integer: " + text);
  }
}

double field_double(const std::vector<std::string>& fields, std::size_t index,
                    std::size_t line_number, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(fields[index], &used);
    if (used != fields[index].size()) throw std::invalid_argument(column);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("line " + std::to_string(line_number) + ": column '" + column +
                      "' is not a number: '" + fields[index] + "'");
  }
}

void write_scan_metadata(std::ofstream& out, const ScanRecord& record) {
  out << "# photons=" << record.model.photons << "\n";
  out << "# visibility=" << format_g10(record.model.visibility) << "\n";
  out << "# bias_phase_rad=" << format_g10(record.model.bias_phase) << "\n";
  out << "# overlap=" << format_g10(record.model.overlap) << "\n";
  out << "# states_per_position=" << format_g10(record.budget.states_per_position) << "\n";
  out << "# sigma_um=" << format_g10(record.geometry.sigma_um) << "\n";
  out << "# separation_um=" << format_g10(record.geometry.separation_um) << "\n";
  out << "# refractive_index=" << format_g10(record.material.refractive_index) << "\n";
  out << "# wavelength_nm=" << format_g10(record.material.wavelength_nm) << "\n";
  out << "# passes=" << record.material.passes << "\n";
  out << "# rng_seed=" << record.rng_seed << "\n";
  out << "# axis=" << (record.axis == ScanAxis::x ? "x" : "y") << "\n";
  out << "# sample=" << record.sample_summary << "\n";
  if (record.is_2d) {
    out << "# rows=" << record.rows << "\n";
    out << "# cols=" << record.cols << "\n";
  }
}

}  // namespace

std::string format_g10(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

void write_scan_csv(const ScanRecord& record, const std::string& path,
                    const MetadataEntries& extra) {
  auto out = open_for_write(path);
  write_header(out, kScanFormatId, extra);
  write_scan_metadata(out, record);
  out << "# columns=" << (record.is_2d ? kScanColumns2d : kScanColumns1d) << "\n";
  for (std::size_t i = 0; i < record.x_um.size(); ++i) {
    out << format_g10(record.x_um[i]) << ",";
    if (record.is_2d) out << format_g10(record.y_um[i]) << ",";
    out << format_g10(record.expected_probability[i]) << ","
        << format_g10(record.expected_counts[i]) << "," << record.sampled_counts[i] << "\n";
  }
}

ScanRecord read_scan_csv(const std::string& path) {
  const ParsedCsv csv = parse_csv(path);
  if (csv.format_id != kScanFormatId)
    throw SchemaError("not a scan CSV (expected '" + std::string(kScanFormatId) + "', got '" +
                      csv.format_id + "')");
  const std::string columns = meta_string(csv, "columns");
  const bool is_2d = columns == kScanColumns2d;
  if (!is_2d && columns != kScanColumns1d)
    throw SchemaError("unexpected columns header: " + columns);

  ScanRecord record;
  record.model = InterferenceModel(static_cast<int>(meta_double(csv, "photons")),
                                   meta_double(csv, "visibility"),
                                   meta_double(csv, "bias_phase_rad"), meta_double(csv, "overlap"));
  record.budget = PhotonBudget(meta_double(csv, "states_per_position"));
  record.geometry = BeamGeometry(meta_double(csv, "sigma_um"), meta_double(csv, "separation_um"));
  record.material =
      MaterialModel(meta_double(csv, "refractive_index"), meta_double(csv, "wavelength_nm"),
                    static_cast<int>(meta_double(csv, "passes")));
  record.rng_seed = meta_u64(csv, "rng_seed");
  const std::string axis = meta_string(csv, "axis");
  if (axis != "x" && axis != "y") throw SchemaError("axis must be 'x' or 'y', got: " + axis);
  record.axis = axis == "x" ? ScanAxis::x : ScanAxis::y;
  record.sample_summary = meta_string(csv, "sample");
  record.is_2d = is_2d;
  if (is_2d) {
    record.rows = static_cast<std::size_t>(meta_double(csv, "rows"));
    record.cols = static_cast<std::size_t>(meta_double(csv, "cols"));
  }

  const std::size_t expected_fields = is_2d ? 5 : 4;
  const char* const names_1d[] = {"x_um", "expected_p", "expected_counts", "sampled_counts"};
  const char* const names_2d[] = {"x_um", "y_um", "expected_p", "expected_counts",
                                  "sampled_counts"};
  const char* const* names = is_2d ? names_2d : names_1d;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& fields = csv.rows[r];
    const std::size_t line = csv.row_numbers[r];
    if (fields.size() != expected_fields)
      throw SchemaError("line " + std::to_string(line) + ": expected " +
                        std::to_string(expected_fields) + " columns, got " +
                        std::to_string(fields.size()));
    std::size_t f = 0;
    record.x_um.push_back(field_double(fields, f, line, names[f]));
    ++f;
    if (is_2d) {
      record.y_um.push_back(field_double(fields, f, line, names[f]));
      ++f;
    }
    record.expected_probability.push_back(field_double(fields, f, line, names[f]));
    ++f;
    record.expected_counts.push_back(field_double(fields, f, line, names[f]));
    ++f;
    const double counts = field_double(fields, f, line, names[f]);
    if (counts < 0.0 || counts != static_cast<double>(static_cast<std::int64_t>(counts)))
      throw SchemaError("line " + std::to_string(line) +
                        ": column 'sampled_counts' must be a nonnegative integer");
    record.sampled_counts.push_back(static_cast<std::int64_t>(counts));
  }
  if (record.x_um.empty()) throw SchemaError("scan CSV has no data rows");
  if (is_2d && record.x_um.size() != record.rows * record.cols)
    throw SchemaError("2D scan CSV has " + std::to_string(record.x_um.size()) +
                      " rows, expected rows*cols = " + std::to_string(record.rows * record.cols));
  return record;
}

void write_pgm16(const ScanRecord& record, const std::string& path,
                 const MetadataEntries& extra) {
  if (!record.is_2d) throw std::invalid_argument("PGM export needs a 2D scan record");
  auto [min_it, max_it] =
      std::minmax_element(record.sampled_counts.begin(), record.sampled_counts.end());
  const double lo = static_cast<double>(*min_it);
  const double hi = static_cast<double>(*max_it);
  const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;

  auto out = open_for_write(path);
  out << "P5\n";
  for (const auto& [key, value] : extra) out << "# " << key << "=" << value << "\n";
  out << "# sampled counts scaled linearly: min=" << format_g10(lo) << " max=" << format_g10(hi)
      << "\n";
  out << record.cols << " " << record.rows << "\n" << 65535 << "\n";
  for (std::int64_t counts : record.sampled_counts) {
    const double scaled = (static_cast<double>(counts) - lo) * scale;
    const auto value = static_cast<std::uint16_t>(scaled + 0.5);
    const unsigned char bytes[2] = {static_cast<unsigned char>(value >> 8),
                                    static_cast<unsigned char>(value & 0xFF)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
}

void write_heightmap_csv(const HeightMap& map, const std::string& path) {
  map.validate();
  auto out = open_for_write(path);
  out << "# " << kHeightmapFormatId << "\n";
  out << "# rows=" << map.rows << "\n";
  out << "# cols=" << map.cols << "\n";
  out << "# pitch_um=" << format_g10(map.pitch_um) << "\n";
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (c > 0) out << ",";
      out << format_g10(map.at(r, c));
    }
    out << "\n";
  }
}

HeightMap read_heightmap_csv(const std::string& path) {
  const ParsedCsv csv = parse_csv(path);
  if (csv.format_id != kHeightmapFormatId)
    throw SchemaError("not a heightmap CSV (expected '" + std::string(kHeightmapFormatId) +
                      "', got '" + csv.format_id + "')");
  HeightMap map;
  map.rows = static_cast<std::size_t>(meta_double(csv, "rows"));
  map.cols = static_cast<std::size_t>(meta_double(csv, "cols"));
  map.pitch_um = meta_double(csv, "pitch_um");
  if (csv.rows.size() != map.rows)
    throw SchemaError("heightmap has " + std::to_string(csv.rows.size()) + " data rows, expected " +
                      std::to_string(map.rows));
  map.heights_nm.reserve(map.rows * map.cols);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& fields = csv.rows[r];
    const std::size_t line = csv.row_numbers[r];
    if (fields.size() != map.cols)
      throw SchemaError("line " + std::to_string(line) + ": expected " +
                        std::to_string(map.cols) + " columns, got " +
                        std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c)
      map.heights_nm.push_back(field_double(fields, c, line, "height_nm"));
  }
  map.validate();
  return map;
}

void write_fringe_csv(const std::vector<FringeSample>& expected,
                      const std::vector<std::int64_t>& sampled, const std::string& path,
                      const MetadataEntries& metadata) {
  if (expected.size() != sampled.size())
    throw std::invalid_argument("fringe CSV needs one sampled value per expected sample");
  auto out = open_for_write(path);
  write_header(out, kFringeFormatId, metadata);
  out << "# columns=phase_rad,expected_counts,sampled_counts\n";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    out << format_g10(expected[i].phase_rad) << "," << format_g10(expected[i].counts) << ","
        << sampled[i] << "\n";
  }
}

void write_snr_report_csv(const SnrReport& report, const std::string& path,
                          const MetadataEntries& metadata) {
  auto out = open_for_write(path);
  write_header(out, kSnrFormatId, metadata);
  out << "# columns=signal,signal_sigma,noise,snr,snr_sigma,background,background_sigma,"
         "amplitude,amplitude_sigma,step_position_um,step_position_sigma_um,step_phase_rad,"
         "step_phase_sigma_rad,step_height_nm,step_height_sigma_nm,background_points\n";
  out << format_g10(report.signal) << "," << format_g10(report.signal_sigma) << ","
      << format_g10(report.noise) << "," << format_g10(report.snr) << ","
      << format_g10(report.snr_sigma) << "," << format_g10(report.background) << ","
      << format_g10(report.background_sigma) << "," << format_g10(report.amplitude) << ","
      << format_g10(report.amplitude_sigma) << "," << format_g10(report.step_position_um) << ","
      << format_g10(report.step_position_sigma_um) << "," << format_g10(report.step_phase_rad)
      << "," << format_g10(report.step_phase_sigma_rad) << ","
      << format_g10(report.step_height_nm) << "," << format_g10(report.step_height_sigma_nm)
      << "," << report.background_points << "\n";
}

void write_bias_sweep_csv(const std::vector<BiasSweepPoint>& points, const std::string& path,
                          const MetadataEntries& metadata) {
  auto out = open_for_write(path);
  write_header(out, kSweepFormatId, metadata);
  out << "# columns=bias_phase_rad,empirical_snr_mean,empirical_snr_stddev,scans_ok,"
         "scans_failed,analytic_snr,states_per_position\n";
  for (const auto& p : points) {
    out << format_g10(p.bias_phase) << "," << format_g10(p.empirical_snr_mean) << ","
        << format_g10(p.empirical_snr_stddev) << "," << p.scans_ok << "," << p.scans_failed << ","
        << format_g10(p.analytic_snr) << "," << format_g10(p.states_per_position) << "\n";
  }
}

}  // namespace qdim
