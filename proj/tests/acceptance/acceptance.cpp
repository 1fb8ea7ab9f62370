// Acceptance checks for the full library. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.
//
//   soilmaxvol_acceptance [--workdir DIR] [--only N]...
//
// Set SOILMAXVOL_STRESS=1 to add the 4,000,000 x 7 maxvol_rect stress run to
// criterion 7 (not run by default).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "soilmaxvol/error.hpp"
#include "soilmaxvol/evaluation.hpp"
#include "soilmaxvol/io.hpp"
#include "soilmaxvol/maxvol.hpp"
#include "soilmaxvol/raster.hpp"
#include "soilmaxvol/samplers.hpp"
#include "soilmaxvol/synth.hpp"
#include "soilmaxvol/terrain.hpp"

using namespace soilmaxvol;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome maxvol_brute_force() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  double worst = 1.0;
  MaxvolOptions tight;
  tight.tol = 1.0 + 1e-9;
  for (int t = 0; t < 200 && out.pass; ++t) {
    const Eigen::Index n = 1 + t % 3;
    const Eigen::Index m = n + 2 + (t / 3) % (9 - n);  // n + 2 <= m <= 10
    const Matrix a = oracle::random_matrix(rng, m, n);
    const auto dense = oracle::to_dense(a);

    const MaxvolResult sq = maxvol_square(a, tight);
    const double vol = oracle::vol1(oracle::rows_of(dense, sq.selected));
    out.require(vol >= oracle::best_single_swap(dense, sq.selected) * (1.0 - 1e-9),
                "square selection improvable by one swap (matrix " + std::to_string(t) + ")");

    const std::size_t k = static_cast<std::size_t>(n) + 2;
    const MaxvolResult rect = maxvol_rect(a, k);
    const double ratio = oracle::vol2(oracle::rows_of(dense, rect.selected)) / oracle::max_vol2(dense, k);
    worst = std::min(worst, ratio);
  }
  const double elapsed = seconds_since(t0);
  out.require(worst >= 0.5, "worst vol2 ratio " + fmt("%.4f", worst) + " < 0.5");
  out.require(elapsed < 30.0, "took " + fmt("%.1f", elapsed) + " s");
  if (out.pass) out.detail = "200 matrices, worst vol2/optimum " + fmt("%.4f", worst) + ", " + fmt("%.2f", elapsed) + " s";
  return out;
}

// 2 ---------------------------------------------------------------------------

Outcome reconstruction() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2002);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = 1 + t % 10;
    const Eigen::Index m = std::max<Eigen::Index>(n + 5, 5 * (t + 1));
    const Matrix a = oracle::random_matrix(rng, m, n);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(m), static_cast<std::size_t>(n) + t % 8);
    const MaxvolResult r = maxvol_rect(a, k);
    worst = std::max(worst, (r.coefficients * gather_rows(a, r.selected) - a).norm() / a.norm());
  }
  const double elapsed = seconds_since(t0);
  out.require(worst <= 1e-8, "relative error " + fmt("%.3e", worst));
  out.require(elapsed < 10.0, "took " + fmt("%.1f", elapsed) + " s");
  if (out.pass) out.detail = "100 matrices up to 500 x 10, max relative error " + fmt("%.2e", worst);
  return out;
}

// 3 ---------------------------------------------------------------------------

Outcome metric_oracle() {
  Outcome out;
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng() % 200;
    const unsigned classes = 1 + static_cast<unsigned>(rng() % 6);
    std::vector<int> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % classes);
      p[i] = static_cast<int>(rng() % (classes + 1));
    }
    worst = std::max(worst, std::abs(balanced_accuracy(y, p) - oracle::macro_recall(y, p)));
  }
  out.require(worst <= 1e-12, "max deviation " + fmt("%.3e", worst));
  const std::vector<int> y{0, 0, 0, 1};
  const std::vector<int> p{0, 0, 0, 0};
  out.require(accuracy(y, p) == 0.75, "hand case accuracy != 0.75");
  out.require(balanced_accuracy(y, p) == 0.5, "hand case balanced accuracy != 0.5");
  if (out.pass) out.detail = "1000 label vectors, max deviation " + fmt("%.1e", worst) + "; [A,A,A,B] case exact";
  return out;
}

// 4 ---------------------------------------------------------------------------

Outcome distance_constraint(const FeatureMatrix& fm) {
  Outcome out;
  const double cs = fm.geometry.cellsize;
  const double floor_m = 54.25 - std::sqrt(2.0) * cs;
  double closest = 1e300;
  for (std::size_t k = 7; k <= 27; ++k) {
    const SampleDesign d = sample_maxvol(fm, k, 0.1);
    out.require(d.points.size() == k, "design size mismatch at k = " + std::to_string(k));
    for (std::size_t a = 0; a < d.points.size(); ++a) {
      for (std::size_t b = a + 1; b < d.points.size(); ++b) {
        closest = std::min(closest, std::hypot(d.points[a].world_x - d.points[b].world_x,
                                               d.points[a].world_y - d.points[b].world_y));
      }
    }
  }
  out.require(closest >= floor_m, "closest pair " + fmt("%.2f", closest) + " m < " + fmt("%.2f", floor_m) + " m");
  if (out.pass) {
    out.detail = "217 x 285 grid, eps 0.1, k 7..27: closest pair " + fmt("%.2f", closest) + " m (bound " +
                 fmt("%.2f", floor_m) + " m)";
  }
  return out;
}

// 5 ---------------------------------------------------------------------------

Outcome terrain_oracles(const RasterGrid& site_dem) {
  Outcome out;
  constexpr double pi = std::numbers::pi;
  double worst = 0.0;
  const struct {
    double a, b, slope, aspect;
  } planes[] = {{1, 0, pi / 4, 3 * pi / 2}, {0, 1, pi / 4, pi}, {-0.5, 0.5, std::atan(std::sqrt(0.5)), 3 * pi / 4}};
  for (const auto& pl : planes) {
    GridGeometry g{9, 11, 0, 0, 2.5};
    RasterGrid dem(g, -9999, 0.0);
    for (std::size_t r = 0; r < g.nrows; ++r) {
      for (std::size_t c = 0; c < g.ncols; ++c) {
        const auto [x, y] = g.cell_center(r, c);
        dem(r, c) = pl.a * x + pl.b * y;
      }
    }
    const SlopeAspect sa = slope_aspect(dem);
    for (std::size_t r = 1; r + 1 < g.nrows; ++r) {
      for (std::size_t c = 1; c + 1 < g.ncols; ++c) {
        worst = std::max({worst, std::abs(sa.slope(r, c) - pl.slope), std::abs(sa.aspect(r, c) - pl.aspect)});
      }
    }
  }
  out.require(worst <= 1e-9, "plane slope/aspect error " + fmt("%.3e", worst));

  const FilledDem once = fill_depressions(site_dem);
  out.require(fill_depressions(once.filled).filled == once.filled, "filling is not idempotent");

  const RasterGrid acc = flow_accumulation(once.filled);
  const int dr[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  const int dc[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const long nr = static_cast<long>(acc.nrows());
  const long nc = static_cast<long>(acc.ncols());
  double outlets = 0.0;
  for (long r = 0; r < nr; ++r) {
    for (long c = 0; c < nc; ++c) {
      bool lower = false;
      for (int k = 0; k < 8; ++k) {
        const long rr = r + dr[k], cc = c + dc[k];
        if (rr >= 0 && cc >= 0 && rr < nr && cc < nc && once.filled(rr, cc) < once.filled(r, c)) lower = true;
      }
      if (!lower) outlets += acc(r, c);
    }
  }
  out.require(outlets == static_cast<double>(acc.size()),
              "outlet accumulation " + fmt("%.0f", outlets) + " != " + std::to_string(acc.size()));

  const GridGeometry one{1, 1, 0, 0, 1};
  const RasterGrid w = twi(RasterGrid(one, -9999, pi / 4), RasterGrid(one, -9999, 1.0), 1.0);
  out.require(std::abs(w(0, 0)) <= 1e-12, "TWI(1, pi/4) = " + fmt("%.3e", w(0, 0)));
  if (out.pass) {
    out.detail = "plane error " + fmt("%.1e", worst) + "; fill idempotent; outlets drain " + std::to_string(acc.size()) +
                 " cells; TWI identity " + fmt("%.1e", std::abs(w(0, 0)));
  }
  return out;
}

// 6 ---------------------------------------------------------------------------

Outcome benchmark_protocol(const FeatureMatrix& fm, const ClassMap& reference) {
  Outcome out;
  const auto t0 = Clock::now();
  BenchmarkProtocol p;
  p.k_min = 7;
  p.k_max = 27;
  p.methods = {Method::Maxvol, Method::Random};
  p.repetitions = 200;
  p.clhs.iterations = 2000;
  p.seed = RngSeed{42};
  const EvaluationReport report = run_benchmark(fm, reference, p);
  std::size_t wins = 0, total = 0;
  std::ostringstream table;
  for (std::size_t k = p.k_min; k <= p.k_max; ++k) {
    const BenchmarkCell* mv = report.find(Method::Maxvol, k);
    const BenchmarkCell* rnd = report.find(Method::Random, k);
    ++total;
    if (mv->error || rnd->error) continue;
    const bool win = mv->balanced_accuracy.mean >= rnd->balanced_accuracy.mean;
    wins += win;
    table << "    k=" << k << "  maxvol " << fmt("%.3f", mv->balanced_accuracy.mean) << "  random mean "
          << fmt("%.3f", rnd->balanced_accuracy.mean) << (win ? "" : "  (loss)") << '\n';
  }
  const double elapsed = seconds_since(t0);
  std::cout << table.str();
  out.require(10 * wins >= 7 * total, std::to_string(wins) + "/" + std::to_string(total) + " k values won");
  out.require(elapsed < 900.0, "took " + fmt("%.0f", elapsed) + " s");
  if (out.pass) {
    out.detail = "maxvol >= random mean on " + std::to_string(wins) + "/" + std::to_string(total) + " k values, " +
                 fmt("%.0f", elapsed) + " s";
  }
  return out;
}

// 7 ---------------------------------------------------------------------------

double time_maxvol(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(rows), 7);
  for (Eigen::Index j = 0; j < 7; ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = u(rng);
  MaxvolOptions opts;
  opts.keep_coefficients = false;
  const auto t0 = Clock::now();
  const MaxvolResult r = maxvol_rect(x, 27, opts);
  const double s = seconds_since(t0);
  if (r.selected.size() != 27) return 1e300;
  return s;
}

Outcome performance() {
  Outcome out;
  const double s = time_maxvol(64000, 7007);
  out.require(s < 10.0, "64000 x 7 took " + fmt("%.2f", s) + " s");
  std::string stress = "stress run skipped (set SOILMAXVOL_STRESS=1)";
  const char* env = std::getenv("SOILMAXVOL_STRESS");
  if (env && std::string(env) == "1") {
    const double big = time_maxvol(4000000, 7008);
    out.require(big < 600.0, "4000000 x 7 took " + fmt("%.1f", big) + " s");
    stress = "4000000 x 7 in " + fmt("%.1f", big) + " s";
  }
  if (out.pass) out.detail = "64000 x 7 -> 27 rows in " + fmt("%.3f", s) + " s; " + stress;
  return out;
}

// 8 ---------------------------------------------------------------------------

std::string run_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  SiteSpec spec = SiteSpec::default_spec();
  spec.nrows = 72;
  spec.ncols = 95;
  spec.cellsize = 7.5;
  const Site site = generate_site(spec);
  write_asc_file((dir / "dem.asc").string(), site.dem);
  write_asc_file((dir / "classes.asc").string(), site.reference.grid, 0);

  const RasterGrid dem = read_asc_file((dir / "dem.asc").string());
  const auto layers = named_layers(derive_terrain(dem));
  for (const NamedLayer& l : layers) write_asc_file((dir / (l.name + ".asc")).string(), l.grid);
  write_feature_matrix_file((dir / "features.csv").string(), build_feature_matrix(layers, dem));

  const FeatureMatrix fm = read_feature_matrix_file((dir / "features.csv").string());
  {
    std::ofstream csv(dir / "points.csv", std::ios::binary);
    write_design_csv(csv, sample_maxvol(fm, 12, 0.1));
  }
  BenchmarkProtocol p;
  p.k_min = 7;
  p.k_max = 10;
  p.repetitions = 10;
  p.clhs.iterations = 300;
  p.seed = RngSeed{8};
  p.record_timing = false;
  const ClassMap reference = ClassMap::from_grid(read_asc_file((dir / "classes.asc").string()));
  {
    std::ofstream json(dir / "report.json", std::ios::binary);
    json << report_to_json(run_benchmark(fm, reference, p));
  }

  std::string all;
  for (const char* f : {"dem.asc", "classes.asc", "slope.asc", "aspect.asc", "depressions.asc", "accumulation.asc",
                        "twi.asc", "features.csv", "points.csv", "report.json"}) {
    std::ifstream in(dir / f, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    all += std::string(f) + "\n" + s.str();
  }
  return all;
}

Outcome format_round_trip(const fs::path& workdir) {
  Outcome out;
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<int> dim(1, 40);
  std::uniform_int_distribution<long> micro(-2000000000L, 2000000000L);
  std::bernoulli_distribution hole(0.05);
  for (int t = 0; t < 100 && out.pass; ++t) {
    GridGeometry g{static_cast<std::size_t>(dim(rng)), static_cast<std::size_t>(dim(rng)), 1234.5, 987.25, 2.5};
    std::vector<double> values(g.nrows * g.ncols);
    for (double& v : values) v = hole(rng) ? -9999.0 : static_cast<double>(micro(rng)) / 1e6;
    const RasterGrid grid(g, -9999.0, values);
    std::istringstream back(write_asc_string(grid, 6));
    out.require(read_asc(back) == grid, "grid " + std::to_string(t) + " changed in the round trip");
  }
  const std::string a = run_pipeline(workdir / "pipeline_a");
  const std::string b = run_pipeline(workdir / "pipeline_b");
  out.require(a == b, "pipeline outputs differ between identical runs");
  if (out.pass) out.detail = "100 grids identical at precision 6; pipeline reruns byte-identical (" + std::to_string(a.size()) + " bytes)";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soilmaxvol acceptance checks"};
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  // Shared default site, built only when needed.
  std::optional<Site> site;
  std::optional<FeatureMatrix> fm;
  auto default_site = [&]() {
    if (!site) {
      site = generate_site(SiteSpec::default_spec());
      fm = build_feature_matrix(named_layers(derive_terrain(site->dem)), site->dem);
    }
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"maxvol brute-force equivalence", maxvol_brute_force},
      {"reconstruction identity", reconstruction},
      {"metric oracle", metric_oracle},
      {"distance constraint", [&] { default_site(); return distance_constraint(*fm); }},
      {"terrain oracles", [&] { default_site(); return terrain_oracles(site->dem); }},
      {"benchmark protocol analogue", [&] { default_site(); return benchmark_protocol(*fm, site->reference); }},
      {"maxvol_rect performance", performance},
      {"format round-trip and reproducibility", [&] { return format_round_trip(workdir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
