#include <filesystem>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "doctest.h"
#include "htc/cli_io.hpp"
#include "htc/config.hpp"
#include "htc/io.hpp"
#include "oracles.hpp"

using namespace htc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("htc_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const char* kConfig = R"({
  "model": {"n_molecules": 3, "disorder_w": 0.25, "lambda": 0.5, "n_max_vib": 6},
  "initial_state": {"kind": "cavity"},
  "evolution": {"t_final_periods": 0.5, "n_samples": 3, "chi_max": 24, "alarm_policy": "record", "trotter_order": 4},
  "ensemble": {"engine": "dense", "n_realizations": 5, "master_seed": 12},
  "sweep": {"axis": "w", "values": [0.0, 0.5], "compare": "ehrenfest"}
})";

}  // namespace

TEST_CASE("config parses and round-trips through its canonical form") {
  const RunConfig c = parse_config(kConfig);
  CHECK(c.model.n_molecules == 3);
  CHECK(c.model.disorder_w == 0.25);
  CHECK(c.model.huang_rhys_lambda == 0.5);
  CHECK(c.initial.kind == InitialStateSpec::Kind::CavityExcited);
  CHECK(c.engine == Engine::Dense);
  CHECK_FALSE(c.throw_on_alarm);
  CHECK(*c.trotter_order == 4);
  CHECK(c.sweep_axis == SweepAxis::DisorderStrength);
  CHECK(*c.sweep_compare == Engine::Ehrenfest);
  const std::vector<double> t = c.sample_times();
  REQUIRE(t.size() == 3);
  CHECK(t[2] == doctest::Approx(0.5 * c.model.period()));

  const std::string canon = serialize_config(c);
  const RunConfig back = parse_config(canon);
  CHECK(serialize_config(back) == canon);
  CHECK(config_hash(back) == config_hash(c));
  RunConfig changed = c;
  changed.master_seed = 13;
  CHECK(config_hash(changed) != config_hash(c));
}

TEST_CASE("schema violations") {
  CHECK_THROWS_AS(parse_config(R"({"model": {"bogus": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"n_molecules": "three"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"n_molecules": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"ensemble": {"engine": "exact"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"evolution": {"trotter_order": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"units": "eV"})"), ConfigError);
  CHECK(exit_code_for(ConfigError("x")) == kExitSchema);
  CHECK(exit_code_for(ResourceLimitError("x")) == kExitResource);
  CHECK(exit_code_for(NumericalError("x")) == kExitEngine);
}

TEST_CASE("meV units are converted to g_c") {
  const RunConfig c = parse_config(R"({"units": "meV", "g_c_meV": 200,
    "model": {"nu": 60, "disorder_w": 100, "g_c": 200}})");
  CHECK(c.model.nu == doctest::Approx(0.3));
  CHECK(c.model.disorder_w == doctest::Approx(0.5));
  CHECK(c.model.g_collective == doctest::Approx(1.0));
}

TEST_CASE("command-line overrides") {
  RunConfig c = parse_config(kConfig);
  Overrides o;
  o.engine = Engine::Mps;
  o.seed = 99;
  c = apply_overrides(c, o);
  CHECK(c.engine == Engine::Mps);
  CHECK(c.master_seed == 99);
}

TEST_CASE("CSV round trip keeps doubles exact") {
  const fs::path d = scratch("csv");
  CsvTable t({"a", "b", "c"});
  t.add({0.1, 3LL, std::string("x")});
  t.add({1.0 / 3.0, -7LL, std::string("y")});
  t.add({std::numeric_limits<double>::quiet_NaN(), 0LL, std::string("z")});
  t.write(d / "t.csv");
  const CsvData r = read_csv(d / "t.csv");
  CHECK(r.header == std::vector<std::string>{"a", "b", "c"});
  const std::vector<double> a = r.numbers("a");
  CHECK(a[0] == 0.1);
  CHECK(a[1] == 1.0 / 3.0);
  CHECK(std::isnan(a[2]));
  CHECK(r.column("c") == 2);
  CHECK(r.column("zz") == -1);
  CHECK(r.rows[1][2] == "y");
}

TEST_CASE("state container round trip") {
  const fs::path d = scratch("states");
  std::vector<StateRecord> recs;
  for (int k = 0; k < 3; ++k) {
    StateRecord r;
    r.label = k == 0 ? "xi_focus" : "rho_focus";
    r.time = 0.5 * k;
    r.time_index = k;
    r.realization = k - 1;
    r.molecule = 1;
    r.matrix = oracle::random_state(4 + k, 2, 50 + k);
    recs.push_back(r);
  }
  write_states(d, "states", recs);
  const std::vector<StateRecord> back = read_states(d, "states");
  REQUIRE(back.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(back[k].label == recs[k].label);
    CHECK(back[k].time == recs[k].time);
    CHECK(back[k].realization == recs[k].realization);
    CHECK((back[k].matrix - recs[k].matrix).norm() == 0.0);
  }
  std::string raw = read_file(d / "states.bin");
  CHECK(raw.substr(0, 8) == "HTCSTAT1");
  raw[0] = 'X';
  atomic_write(d / "states.bin", raw);
  CHECK_THROWS(read_states(d, "states"));
}

TEST_CASE("manifest round trip and audit") {
  const fs::path d = scratch("manifest");
  atomic_write(d / "a.csv", "x\n1\n");
  RunManifest m;
  m.command = "simulate";
  m.config_hash = "abc";
  m.config_json = "{}";
  m.engine = "mps";
  m.version = library_version();
  m.master_seed = 3;
  m.seeds = {1, 18446744073709551615ULL};
  m.workers = 2;
  m.diagnostics = {{"max_norm_error", 1e-12}};
  m.files = {"a.csv"};
  write_manifest(d, m);
  const RunManifest r = read_manifest(d);
  CHECK(r.command == "simulate");
  CHECK(r.seeds == m.seeds);
  CHECK(r.diagnostics.front().second == 1e-12);
  CHECK(r.files == m.files);
  CHECK(audit_manifests(d).ok());

  atomic_write(d / "stray.csv", "x\n");
  ManifestAudit a = audit_manifests(d);
  CHECK_FALSE(a.ok());
  REQUIRE(a.orphans.size() == 1);
  fs::remove(d / "stray.csv");
  fs::remove(d / "a.csv");
  a = audit_manifests(d);
  CHECK(a.missing.size() == 1);
}

TEST_CASE("worker count from the environment") {
  ::setenv("HTC_WORKERS", "3", 1);
  CHECK(cli_workers(7) == 3);
  ::setenv("HTC_WORKERS", "zero", 1);
  CHECK_THROWS_AS(cli_workers(7), ConfigError);
  ::unsetenv("HTC_WORKERS");
  CHECK(cli_workers(7) == 7);
  CHECK(cli_workers(0) >= 1);
}
