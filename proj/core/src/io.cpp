#include "htc/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#ifndef HTC_VERSION
#define HTC_VERSION "unknown"
#endif

namespace htc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kStateMagic[8] = {'H', 'T', 'C', 'S', 'T', 'A', 'T', '1'};

void put_double(std::string& out, double v) {
  static_assert(std::endian::native == std::endian::little, "binary containers assume little-endian hosts");
  char buf[sizeof(double)];
  std::memcpy(buf, &v, sizeof(double));
  out.append(buf, sizeof(double));
}

double get_double(const std::string& in, std::size_t pos) {
  double v;
  std::memcpy(&v, in.data() + pos, sizeof(double));
  return v;
}

std::string escape_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

void atomic_write(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw InvalidArgument("csv row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t c = 0; c < header_.size(); ++c) out += (c ? "," : "") + escape_cell(header_[c]);
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (const auto* d = std::get_if<double>(&row[c])) out += format_double(*d);
      else if (const auto* i = std::get_if<long long>(&row[c])) out += std::to_string(*i);
      else out += escape_cell(std::get<std::string>(row[c]));
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const fs::path& path) const { atomic_write(path, str()); }

int CsvData::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return static_cast<int>(c);
  return -1;
}

std::vector<double> CsvData::numbers(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw InvalidArgument("csv has no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(std::stod(r[static_cast<std::size_t>(c)]));
  return out;
}

CsvData read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvData data;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty csv " + path.string());
  data.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    data.rows.push_back(split_csv_line(line));
    if (data.rows.back().size() != data.header.size()) throw InvalidArgument("ragged csv " + path.string());
  }
  return data;
}

void write_states(const fs::path& dir, const std::string& stem, const std::vector<StateRecord>& records) {
  std::string bin(kStateMagic, sizeof(kStateMagic));
  json index = json::object();
  index["format"] = "HTCSTAT1";
  index["layout"] = "per record: real parts then imaginary parts, column-major, little-endian float64";
  index["records"] = json::array();
  for (const StateRecord& r : records) {
    index["records"].push_back({{"label", r.label},
                                {"time", r.time},
                                {"time_index", r.time_index},
                                {"realization", r.realization},
                                {"molecule", r.molecule},
                                {"rows", r.matrix.rows()},
                                {"cols", r.matrix.cols()},
                                {"offset", bin.size()}});
    const Index n = r.matrix.size();
    for (Index k = 0; k < n; ++k) put_double(bin, r.matrix.data()[k].real());
    for (Index k = 0; k < n; ++k) put_double(bin, r.matrix.data()[k].imag());
  }
  atomic_write(dir / (stem + ".bin"), bin);
  atomic_write(dir / (stem + ".json"), index.dump(2) + "\n");
}

std::vector<StateRecord> read_states(const fs::path& dir, const std::string& stem) {
  const std::string bin = read_file(dir / (stem + ".bin"));
  if (bin.size() < sizeof(kStateMagic) || std::memcmp(bin.data(), kStateMagic, sizeof(kStateMagic)) != 0)
    throw InvalidArgument("not a state container: " + (dir / (stem + ".bin")).string());
  const json index = json::parse(read_file(dir / (stem + ".json")));
  std::vector<StateRecord> out;
  for (const json& r : index.at("records")) {
    StateRecord rec;
    rec.label = r.at("label").get<std::string>();
    rec.time = r.at("time").get<double>();
    rec.time_index = r.at("time_index").get<int>();
    rec.realization = r.at("realization").get<int>();
    rec.molecule = r.at("molecule").get<int>();
    const Index rows = r.at("rows").get<Index>();
    const Index cols = r.at("cols").get<Index>();
    std::size_t pos = r.at("offset").get<std::size_t>();
    const std::size_t n = static_cast<std::size_t>(rows * cols);
    if (pos + 2 * n * sizeof(double) > bin.size()) throw InvalidArgument("state container truncated");
    rec.matrix.resize(rows, cols);
    for (std::size_t k = 0; k < n; ++k)
      rec.matrix.data()[k] = Complex(get_double(bin, pos + k * sizeof(double)),
                                     get_double(bin, pos + (n + k) * sizeof(double)));
    out.push_back(std::move(rec));
  }
  return out;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config_json.empty() ? json(nullptr) : json::parse(m.config_json);
  j["engine"] = m.engine;
  j["version"] = m.version;
  j["master_seed"] = m.master_seed;
  j["seeds"] = m.seeds;
  j["workers"] = m.workers;
  j["wall_seconds"] = m.wall_seconds;
  json diag = json::object();
  for (const auto& [k, v] : m.diagnostics) diag[k] = std::isfinite(v) ? json(v) : json(nullptr);
  j["diagnostics"] = diag;
  j["files"] = m.files;
  atomic_write(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& dir) {
  const json j = json::parse(read_file(dir / "manifest.json"));
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  if (!j.at("config").is_null()) m.config_json = j.at("config").dump(2);
  m.engine = j.at("engine").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.workers = j.at("workers").get<int>();
  m.wall_seconds = j.at("wall_seconds").get<double>();
  for (auto it = j.at("diagnostics").begin(); it != j.at("diagnostics").end(); ++it)
    m.diagnostics.emplace_back(it.key(), it->is_null() ? std::nan("") : it->get<double>());
  m.files = j.at("files").get<std::vector<std::string>>();
  return m;
}

ManifestAudit audit_manifests(const fs::path& root) {
  ManifestAudit audit;
  std::map<std::string, int> claims;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() != "manifest.json") continue;
    const fs::path dir = entry.path().parent_path();
    claims[fs::relative(entry.path(), root).generic_string()] += 1;
    for (const std::string& f : read_manifest(dir).files) {
      const fs::path p = dir / f;
      const std::string rel = fs::relative(p, root).generic_string();
      if (++claims[rel] == 2) audit.duplicates.push_back(rel);
      if (!fs::exists(p)) audit.missing.push_back(rel);
    }
  }
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), root).generic_string();
    if (!claims.count(rel)) audit.orphans.push_back(rel);
  }
  return audit;
}

std::string library_version() { return HTC_VERSION; }

}  // namespace htc
