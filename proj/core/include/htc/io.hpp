#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "htc/types.hpp"

namespace htc {

/// Writes to `<path>.tmp` and renames over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Doubles are written with 17 significant digits so values round-trip exactly.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header);

  void add(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);

/// Parsed CSV: header plus string cells.
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
  std::vector<double> numbers(const std::string& name) const;
};

CsvData read_csv(const std::filesystem::path& path);

/// One complex matrix in a state container.
struct StateRecord {
  std::string label;       // e.g. "xi_focus", "xi_avg", "rho_focus"
  double time = 0.0;
  int time_index = 0;
  int realization = -1;    // -1 for ensemble averages
  int molecule = 0;        // 0 for molecule averages
  CMatrix matrix;
};

/// Writes `<stem>.bin` and its index `<stem>.json`.
///
/// The binary file is the 8-byte magic "HTCSTAT1" followed by, for every
/// record, rows*cols real parts then rows*cols imaginary parts, column-major,
/// as little-endian IEEE doubles. The index lists label, time, time_index,
/// realization, molecule, rows, cols and byte offset of each record.
void write_states(const std::filesystem::path& dir, const std::string& stem, const std::vector<StateRecord>& records);
std::vector<StateRecord> read_states(const std::filesystem::path& dir, const std::string& stem);

/// Provenance of one output directory.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string config_json;   // canonical configuration
  std::string engine;
  std::string version;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<std::string> files;  // relative to the manifest directory
};

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& dir);

/// Files under `root` that no manifest.json references, and references that
/// are claimed by more than one manifest or point at missing files.
struct ManifestAudit {
  std::vector<std::string> orphans;
  std::vector<std::string> duplicates;
  std::vector<std::string> missing;
  bool ok() const { return orphans.empty() && duplicates.empty() && missing.empty(); }
};

ManifestAudit audit_manifests(const std::filesystem::path& root);

std::string library_version();

}  // namespace htc
