#include <cmath>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "htc/analysis.hpp"
#include "htc/io.hpp"

using namespace htc;
namespace fs = std::filesystem;

namespace {

std::string lab() {
  const char* p = std::getenv("HTC_LAB");
  return p ? p : "";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("htc_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const int rc = std::system((lab() + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  atomic_write(dir / name, body);
  return dir / name;
}

const char* kSmall = R"({"model": {"n_molecules": 2, "disorder_w": 0.5, "n_max_vib": 5},
 "evolution": {"n_samples": 5},
 "ensemble": {"engine": "dense", "n_realizations": 3, "master_seed": 7}})";

}  // namespace

TEST_CASE("exit codes") {
  if (lab().empty()) return;
  const fs::path d = scratch("codes");
  CHECK(run("--bogus-flag") == 2);
  CHECK(run("simulate --config " + write_config(d, "bad.json", R"({"model": {"bogus": 1}})").string() +
            " --out " + (d / "o1").string()) == 2);
  CHECK(run("simulate --config " + write_config(d, "big.json", R"({"model": {"n_molecules": 12},
    "ensemble": {"engine": "dense"}, "dense": {"dimension_limit": 1000}})").string() +
            " --out " + (d / "o2").string()) == 4);
  CHECK(run("simulate --config " + write_config(d, "alarm.json", R"({"model": {"n_molecules": 4, "disorder_w": 0.5},
    "evolution": {"chi_max": 1, "n_samples": 2}})").string() +
            " --out " + (d / "o3").string()) == 3);
  CHECK(run("sweep --config " + write_config(d, "nosweep.json", kSmall).string() + " --out " + (d / "o4").string()) == 2);
}

TEST_CASE("simulate is deterministic and self-describing") {
  if (lab().empty()) return;
  const fs::path d = scratch("sim");
  const fs::path cfg = write_config(d, "small.json", kSmall);
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + (d / "a").string() + " --workers 1") == 0);
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + (d / "b").string() + " --workers 3") == 0);
  for (const char* f : {"series.csv", "scatter.csv", "observables.csv", "states.bin"})
    CHECK(read_file(d / "a" / f) == read_file(d / "b" / f));
  const RunManifest m = read_manifest(d / "a");
  CHECK(m.command == "simulate");
  CHECK(m.engine == "dense");
  CHECK(m.seeds.size() == 3);
  CHECK(read_csv(d / "a" / "series.csv").numbers("delta").size() == 10);

  REQUIRE(run("export-figure-data --run " + (d / "a").string() + " --figure wigner_map") == 0);
  REQUIRE(run("export-figure-data --run " + (d / "a").string() + " --figure delta_vs_time") == 0);
  REQUIRE(run("export-figure-data --run " + (d / "a").string() + " --figure thermal_compare") == 0);
  CHECK(run("export-figure-data --run " + (d / "a").string() + " --figure scaling") == 2);
  CHECK(audit_manifests(d / "a").ok());

  const CsvData w = read_csv(d / "a" / "figures" / "wigner_map" / "wigner_map.csv");
  const std::vector<double> t = w.numbers("time");
  const std::vector<double> x = w.numbers("x");
  const std::vector<double> p = w.numbers("p");
  const std::vector<double> wv = w.numbers("W");
  bool found = false;
  for (std::size_t k = 0; k < wv.size(); ++k)
    if (t[k] == 0.0 && std::abs(x[k]) < 1e-9 && std::abs(p[k]) < 1e-9 && w.rows[k][w.column("state")] == "xi_focus") {
      CHECK(wv[k] == doctest::Approx(1.0 / M_PI).epsilon(1e-10));
      found = true;
    }
  CHECK(found);
}

TEST_CASE("no vibronic coupling means no non-Gaussianity; no disorder means no scatter") {
  if (lab().empty()) return;
  const fs::path d = scratch("flat");
  const fs::path cfg = write_config(d, "flat.json", R"({"model": {"n_molecules": 3, "lambda": 0.0, "disorder_w": 0.0, "n_max_vib": 4},
    "evolution": {"n_samples": 4}, "ensemble": {"engine": "mps", "n_realizations": 2}})");
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + (d / "r").string()) == 0);
  const CsvData s = read_csv(d / "r" / "series.csv");
  for (double v : s.numbers("delta")) CHECK(std::abs(v) < 1e-8);
  for (double v : s.numbers("scatter_std")) CHECK((std::isnan(v) || v == 0.0));
  REQUIRE(run("export-figure-data --run " + (d / "r").string() + " --figure delta_vs_time") == 0);
  CHECK(audit_manifests(d / "r").ok());
}

TEST_CASE("sweep and oracle-check") {
  if (lab().empty()) return;
  const fs::path d = scratch("sweep");
  const fs::path cfg = write_config(d, "sw.json", R"({"model": {"n_molecules": 2, "n_max_vib": 4},
    "evolution": {"n_samples": 2}, "ensemble": {"engine": "dense"},
    "sweep": {"axis": "n", "values": [1, 2], "compare": "ehrenfest"}})");
  REQUIRE(run("sweep --config " + cfg.string() + " --out " + (d / "s").string()) == 0);
  REQUIRE(run("export-figure-data --run " + (d / "s").string() + " --figure overlap_scaling") == 0);
  CHECK(audit_manifests(d / "s").ok());

  const fs::path oc = write_config(d, "oc.json", R"({"model": {"n_molecules": 2, "disorder_w": 0.5, "n_max_vib": 5},
    "evolution": {"n_samples": 3}})");
  CHECK(run("oracle-check --config " + oc.string() + " --out " + (d / "o").string()) == 0);
  CHECK(fs::exists(d / "o" / "oracle.csv"));
  ::setenv("HTC_WORKERS", "many", 1);
  CHECK(run("oracle-check --config " + oc.string()) == 2);
  ::unsetenv("HTC_WORKERS");
}
