#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qdim/analysis.hpp"
#include "qdim/interference.hpp"
#include "qdim/scan.hpp"

namespace qdim {

/// Extra '#' header entries (key, value) prepended to a CSV, e.g. the run
/// seed and config hash.
using MetadataEntries = std::vector<std::pair<std::string, std::string>>;

/// Shortest representation with 10 significant digits ("%.10g").
std::string format_g10(double value);

std::uint64_t fnv1a64(std::string_view text);
std::string to_hex(std::uint64_t value);

/// Versioned scan CSV: '#' key=value headers, then one row per position,
/// `x_um[,y_um],expected_p,expected_counts,sampled_counts`.
void write_scan_csv(const ScanRecord& record, const std::string& path,
                    const MetadataEntries& extra = {});

/// Parse a scan CSV produced by write_scan_csv (or schema-compatible data).
/// Throws SchemaError naming the offending row or column.
ScanRecord read_scan_csv(const std::string& path);

/// 16-bit big-endian P5 image of the sampled counts, linearly min-max
/// scaled; the scaling (and any extra metadata) is recorded in header
/// comments.
void write_pgm16(const ScanRecord& record, const std::string& path,
                 const MetadataEntries& extra = {});

void write_heightmap_csv(const HeightMap& map, const std::string& path);
HeightMap read_heightmap_csv(const std::string& path);

void write_fringe_csv(const std::vector<FringeSample>& expected,
                      const std::vector<std::int64_t>& sampled, const std::string& path,
                      const MetadataEntries& metadata);

void write_snr_report_csv(const SnrReport& report, const std::string& path,
                          const MetadataEntries& metadata);

void write_bias_sweep_csv(const std::vector<BiasSweepPoint>& points, const std::string& path,
                          const MetadataEntries& metadata);

}  // namespace qdim
