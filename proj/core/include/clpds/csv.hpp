// Time-series CSV exchange, metrics key-value files and content hashing.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clpds/types.hpp"

namespace clpds {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Series exchange header: t,x,y,chi,vx,vy,vz,wx,wy,wz,ax,ay,az
extern const char* const kSeriesHeader;

void write_series_csv(const std::filesystem::path& path, const Series& series);

/// Reads a series CSV. The chi column may be absent (chi set to NaN).
/// Malformed rows raise with the offending line number.
Series read_series_csv(const std::filesystem::path& path);

/// Generic headered columnar CSV (figure exports, per-step records).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table_csv(const std::filesystem::path& path, const Table& table);
Table read_table_csv(const std::filesystem::path& path);

/// Flat key-value text file (metrics summaries, manifests).
void write_kv_file(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& kv);

/// FNV-1a 64-bit hash of a file's bytes, hex-encoded.
std::string file_hash(const std::filesystem::path& path);

}  // namespace clpds
