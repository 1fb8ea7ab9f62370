#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "soilmaxvol/io.hpp"
#include "soilmaxvol/raster.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::absolute("cli_work");

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + SOILMAXVOL_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string p(const fs::path& path) { return "\"" + path.string() + "\""; }

const std::string kSmall = "--nrows 60 --ncols 80 --cellsize 9";

// synth + features on the small site, shared by several cases.
fs::path prepared() {
  static const fs::path dir = [] {
    const fs::path d = kWork / "prepared";
    fs::remove_all(d);
    REQUIRE(cli("synth " + kSmall + " --out " + p(d / "site")).code == 0);
    REQUIRE(cli("features --dem " + p(d / "site" / "dem.asc") + " --out " + p(d / "feat")).code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("help exits 0 for every subcommand without writing files") {
  const fs::path before = kWork / "help";
  fs::remove_all(before);
  for (const char* sub : {"", "synth", "features", "sample", "evaluate", "bench-timing"}) {
    const Run r = cli(std::string(sub) + " --help");
    INFO(sub);
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(before));
}

TEST_CASE("usage errors exit 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("sample --matrix x.csv").code == 2);
  CHECK(cli("sample --matrix x.csv --out o --method grid").code == 2);
  CHECK(cli("evaluate --matrix a --classes b --out c --k-range 9").code == 2);
}

TEST_CASE("synth writes readable rasters reproducibly") {
  const fs::path a = kWork / "synth_a";
  const fs::path b = kWork / "synth_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(cli("synth " + kSmall + " --seed 7 --out " + p(a)).code == 0);
  REQUIRE(cli("synth " + kSmall + " --seed 7 --out " + p(b)).code == 0);
  CHECK(slurp(a / "dem.asc") == slurp(b / "dem.asc"));
  CHECK(slurp(a / "classes.asc") == slurp(b / "classes.asc"));
  const soilmaxvol::RasterGrid dem = soilmaxvol::read_asc_file((a / "dem.asc").string());
  CHECK(dem.nrows() == 60);
  CHECK(dem.ncols() == 80);
}

TEST_CASE("synth reports the histogram of an empty class") {
  const Run r = cli("synth " + kSmall + " --depth-threshold 1000 --out " + p(kWork / "synth_bad"));
  CHECK(r.code == 1);
  CHECK(r.err.find("DegenerateSpec") != std::string::npos);
  CHECK(r.err.find("3=0") != std::string::npos);
}

TEST_CASE("synth accepts a JSON spec") {
  const fs::path spec = kWork / "spec.json";
  std::ofstream(spec) << R"({"nrows": 60, "ncols": 80, "cellsize": 9, "seed": 3})";
  const fs::path out = kWork / "synth_json";
  REQUIRE(cli("synth --spec " + p(spec) + " --out " + p(out)).code == 0);
  CHECK(soilmaxvol::read_asc_file((out / "dem.asc").string()).ncols() == 80);
  const Run bad = cli("synth --spec " + p(kWork / "missing.json") + " --out " + p(out));
  CHECK(bad.code == 1);
}

TEST_CASE("features writes five layers and a seven-column matrix") {
  const fs::path d = prepared();
  for (const char* name : {"slope", "aspect", "depressions", "accumulation", "twi"}) {
    CHECK(fs::exists(d / "feat" / (std::string(name) + ".asc")));
  }
  const soilmaxvol::FeatureMatrix fm = soilmaxvol::read_feature_matrix_file((d / "feat" / "features.csv").string());
  CHECK(fm.cols() == 7);
  CHECK(fm.rows() == 4800);

  const fs::path again = kWork / "feat_again";
  REQUIRE(cli("features --dem " + p(d / "site" / "dem.asc") + " --out " + p(again)).code == 0);
  CHECK(slurp(again / "features.csv") == slurp(d / "feat" / "features.csv"));
  CHECK(slurp(again / "twi.asc") == slurp(d / "feat" / "twi.asc"));
}

TEST_CASE("features rejects a DEM below 3x3") {
  const fs::path dem = kWork / "tiny.asc";
  std::ofstream(dem) << "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4\n";
  const Run r = cli("features --dem " + p(dem) + " --out " + p(kWork / "tiny_out"));
  CHECK(r.code == 1);
  CHECK(r.err.find("TooSmall") != std::string::npos);
}

TEST_CASE("features refuses to write over its input") {
  const fs::path d = prepared();
  CHECK(cli("features --dem " + p(d / "site" / "dem.asc") + " --out " + p(d / "site" / "dem.asc")).code == 2);
}

TEST_CASE("sample maxvol honours epsilon and writes CSV and GeoJSON") {
  const fs::path d = prepared();
  const fs::path out = kWork / "sample_maxvol";
  REQUIRE(cli("sample --matrix " + p(d / "feat" / "features.csv") + " --method maxvol --k 16 --epsilon 0.1 --out " +
              p(out))
              .code == 0);
  std::ifstream csv(out / "points.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "rank,matrix_row,grid_row,grid_col,world_x,world_y");
  std::vector<std::pair<double, double>> pts;
  while (std::getline(csv, line)) {
    std::stringstream s(line);
    std::string f[6];
    for (auto& x : f) std::getline(s, x, ',');
    pts.emplace_back(std::stod(f[4]), std::stod(f[5]));
  }
  REQUIRE(pts.size() == 16);
  // Extents 720 m x 540 m: 0.1 in normalised units is at least 0.1 * (540 - 9) m.
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      CHECK(std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second) >= 0.1 * 531.0 - 1e-9);
    }
  }
  const auto gj = nlohmann::json::parse(slurp(out / "points.geojson"));
  CHECK(gj["features"].size() == 16);
}

TEST_CASE("sample random is stable under a fixed seed") {
  const fs::path d = prepared();
  const std::string base = "sample --matrix " + p(d / "feat" / "features.csv") + " --method random --k 9 --seed 5 ";
  REQUIRE(cli(base + "--out " + p(kWork / "rand_a")).code == 0);
  REQUIRE(cli(base + "--out " + p(kWork / "rand_b")).code == 0);
  CHECK(slurp(kWork / "rand_a" / "points.csv") == slurp(kWork / "rand_b" / "points.csv"));
}

TEST_CASE("sample maxvol with k below the feature count fails with an explanation") {
  const fs::path d = prepared();
  const Run r = cli("sample --matrix " + p(d / "feat" / "features.csv") + " --method maxvol --k 5 --out " +
                    p(kWork / "few"));
  CHECK(r.code != 0);
  CHECK(r.err.find("k >= number of features") != std::string::npos);
}

TEST_CASE("sample reports the achieved count when epsilon is too large") {
  const fs::path d = prepared();
  const Run r = cli("sample --matrix " + p(d / "feat" / "features.csv") + " --method maxvol --k 27 --epsilon 0.6 --out " +
                    p(kWork / "crowded"));
  CHECK(r.code == 1);
  CHECK(r.err.find("InsufficientPoints") != std::string::npos);
}

TEST_CASE("evaluate writes the report and plot data") {
  const fs::path d = prepared();
  const fs::path out = kWork / "eval";
  const Run r = cli("evaluate --matrix " + p(d / "feat" / "features.csv") + " --classes " +
                    p(d / "site" / "classes.asc") +
                    " --k-range 7:9 --repetitions 1 --clhs-iterations 100 --method maxvol,random --out " + p(out));
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
  REQUIRE(doc["cells"].size() == 6);
  for (const auto& cell : doc["cells"]) {
    CHECK(cell["accuracy"]["p5"] == cell["accuracy"]["mean"]);
    CHECK(cell["accuracy"]["mean"] == cell["accuracy"]["p95"]);
  }
  CHECK(fs::exists(out / "plot_data.csv"));
}

TEST_CASE("evaluate fails without a class map") {
  const fs::path d = prepared();
  const Run r = cli("evaluate --matrix " + p(d / "feat" / "features.csv") + " --classes " + p(kWork / "none.asc") +
                    " --k-range 7:8 --repetitions 1 --out " + p(kWork / "eval_missing"));
  CHECK(r.code == 1);
}

TEST_CASE("evaluate exits 1 when every cell fails") {
  const fs::path d = prepared();
  const Run r = cli("evaluate --matrix " + p(d / "feat" / "features.csv") + " --classes " +
                    p(d / "site" / "classes.asc") + " --k-range 3:4 --method maxvol --out " + p(kWork / "eval_fail"));
  CHECK(r.code == 1);
  CHECK(fs::exists(kWork / "eval_fail" / "report.json"));
}

TEST_CASE("the full pipeline is byte-reproducible") {
  auto pipeline = [](const fs::path& root) {
    fs::remove_all(root);
    REQUIRE(cli("synth " + kSmall + " --seed 11 --out " + p(root / "site")).code == 0);
    REQUIRE(cli("features --dem " + p(root / "site" / "dem.asc") + " --out " + p(root / "feat")).code == 0);
    REQUIRE(cli("sample --matrix " + p(root / "feat" / "features.csv") + " --k 12 --epsilon 0.1 --out " +
                p(root / "pts"))
                .code == 0);
    REQUIRE(cli("evaluate --matrix " + p(root / "feat" / "features.csv") + " --classes " +
                p(root / "site" / "classes.asc") + " --k-range 7:10 --repetitions 5 --clhs-iterations 200 --seed 3" +
                " --no-timing --out " + p(root / "eval"))
                .code == 0);
  };
  pipeline(kWork / "pipe_a");
  pipeline(kWork / "pipe_b");
  for (const char* f : {"site/dem.asc", "site/classes.asc", "feat/features.csv", "pts/points.csv",
                        "pts/points.geojson", "eval/report.json", "eval/plot_data.csv"}) {
    INFO(f);
    CHECK(slurp(kWork / "pipe_a" / f) == slurp(kWork / "pipe_b" / f));
  }
}

TEST_CASE("bench-timing prints mean and spread") {
  const Run r = cli("bench-timing --rows 3000 --runs 2");
  CHECK(r.code == 0);
  CHECK(r.out.find("+-") != std::string::npos);
}
