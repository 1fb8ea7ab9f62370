// soilmaxvol: synthetic sites, terrain features, sampling designs and the
// sampling benchmark from the command line.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "soilmaxvol/error.hpp"
#include "soilmaxvol/evaluation.hpp"
#include "soilmaxvol/io.hpp"
#include "soilmaxvol/maxvol.hpp"
#include "soilmaxvol/raster.hpp"
#include "soilmaxvol/samplers.hpp"
#include "soilmaxvol/synth.hpp"
#include "soilmaxvol/terrain.hpp"

namespace fs = std::filesystem;
using namespace soilmaxvol;

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KRange {
  std::size_t lo = 7;
  std::size_t hi = 27;
};

KRange parse_k_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--k-range expects A:B, got '" + text + "'");
  try {
    KRange r{std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
    if (r.lo > r.hi) throw UsageError("--k-range lower bound exceeds upper bound");
    return r;
  } catch (const std::logic_error&) {
    throw UsageError("--k-range expects two integers, got '" + text + "'");
  }
}

void ensure_out_dir(const std::string& out, const std::vector<std::string>& inputs) {
  for (const std::string& in : inputs) {
    if (!in.empty() && fs::exists(in) && fs::exists(out) && fs::equivalent(in, out)) {
      throw UsageError("--out must differ from the input path '" + in + "'");
    }
  }
  if (fs::exists(out) && !fs::is_directory(out)) throw UsageError("--out '" + out + "' is not a directory");
  fs::create_directories(out);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IOError", "cannot write '" + path.string() + "'");
  return out;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string spec_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> nrows, ncols;
  std::optional<double> cellsize, noise;
  std::optional<double> depth_threshold, twi_dry, twi_wet;
  int precision = 6;
};

int run_synth(const SynthArgs& a) {
  SiteSpec spec = SiteSpec::default_spec();
  if (!a.spec_file.empty()) {
    std::ifstream in(a.spec_file);
    if (!in) throw Error("IOError", "cannot open '" + a.spec_file + "'");
    std::stringstream text;
    text << in.rdbuf();
    spec = site_spec_from_json(text.str());
  }
  if (a.seed) spec.seed = RngSeed{*a.seed};
  if (a.nrows) spec.nrows = *a.nrows;
  if (a.ncols) spec.ncols = *a.ncols;
  if (a.cellsize) spec.cellsize = *a.cellsize;
  if (a.noise) spec.noise_amplitude = *a.noise;
  if (a.depth_threshold) spec.rules.depth_threshold = *a.depth_threshold;
  if (a.twi_dry) spec.rules.twi_dry = *a.twi_dry;
  if (a.twi_wet) spec.rules.twi_wet = *a.twi_wet;

  ensure_out_dir(a.out, {a.spec_file});
  const Site site = generate_site(spec);
  const fs::path dir(a.out);
  {
    auto out = open_out(dir / "dem.asc");
    write_asc(out, site.dem, a.precision);
  }
  {
    auto out = open_out(dir / "classes.asc");
    write_asc(out, site.reference.grid, 0);
  }
  {
    auto out = open_out(dir / "site.json");
    out << site_spec_to_json(spec) << '\n';
  }
  std::cout << "wrote " << (dir / "dem.asc").string() << " and " << (dir / "classes.asc").string() << " ("
            << site.dem.nrows() << " x " << site.dem.ncols() << ", classes";
  for (const auto& [label, count] : class_histogram(site.reference.grid)) std::cout << ' ' << label << '=' << count;
  std::cout << ")\n";
  return 0;
}

// --- features --------------------------------------------------------------

struct FeaturesArgs {
  std::string dem;
  std::string out;
  int precision = 6;
  double min_tan_slope = 0.001;
};

int run_features(const FeaturesArgs& a) {
  ensure_out_dir(a.out, {a.dem});
  const RasterGrid dem = read_asc_file(a.dem);
  const TerrainLayers layers = derive_terrain(dem, a.min_tan_slope);
  const auto named = named_layers(layers);
  const fs::path dir(a.out);
  for (const NamedLayer& layer : named) {
    auto out = open_out(dir / (layer.name + ".asc"));
    write_asc(out, layer.grid, a.precision);
  }
  const FeatureMatrix fm = build_feature_matrix(named, dem);
  {
    auto out = open_out(dir / "features.csv");
    write_feature_matrix(out, fm);
  }
  for (const std::string& w : fm.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote 5 layers and features.csv (" << fm.rows() << " pixels x " << fm.cols() << " features)\n";
  return 0;
}

// --- sample ----------------------------------------------------------------

struct SampleArgs {
  std::string matrix;
  std::string out;
  std::string method = "maxvol";
  std::size_t k = 16;
  double epsilon = 0.0;
  std::uint64_t seed = 42;
  std::size_t clhs_iterations = 10000;
};

int run_sample(const SampleArgs& a) {
  const Method method = parse_method(a.method);
  const FeatureMatrix fm = read_feature_matrix_file(a.matrix);
  if (method == Method::Maxvol && a.k < fm.cols()) {
    throw UsageError("maxvol needs k >= number of features (" + std::to_string(fm.cols()) + "), got k = " +
                     std::to_string(a.k));
  }
  ensure_out_dir(a.out, {a.matrix});

  SampleDesign design;
  switch (method) {
    case Method::Maxvol: design = sample_maxvol(fm, a.k, a.epsilon); break;
    case Method::Random: design = sample_random(fm, a.k, RngSeed{a.seed}); break;
    case Method::KennardStone: design = sample_kennard_stone(fm, a.k); break;
    case Method::Clhs: {
      ClhsOptions opts;
      opts.iterations = a.clhs_iterations;
      design = sample_clhs(fm, a.k, opts, RngSeed{a.seed});
      break;
    }
  }
  const fs::path dir(a.out);
  {
    auto out = open_out(dir / "points.csv");
    write_design_csv(out, design);
  }
  {
    auto out = open_out(dir / "points.geojson");
    write_design_geojson(out, design);
  }
  std::cout << "wrote " << design.points.size() << " " << method_name(method) << " points to "
            << (dir / "points.csv").string() << '\n';
  return 0;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string matrix;
  std::string classes;
  std::string out;
  std::vector<std::string> methods{"maxvol", "random", "ks", "clhs"};
  std::string k_range = "7:27";
  std::size_t repetitions = 1000;
  std::size_t clhs_iterations = 10000;
  double epsilon = 0.0;
  std::uint64_t seed = 42;
  bool drop_coords = false;
  bool no_timing = false;
};

int run_evaluate(const EvaluateArgs& a) {
  BenchmarkProtocol protocol;
  const KRange range = parse_k_range(a.k_range);
  protocol.k_min = range.lo;
  protocol.k_max = range.hi;
  protocol.methods.clear();
  for (const std::string& m : a.methods) protocol.methods.push_back(parse_method(m));
  protocol.repetitions = a.repetitions;
  protocol.clhs.iterations = a.clhs_iterations;
  protocol.epsilon = a.epsilon;
  protocol.seed = RngSeed{a.seed};
  protocol.drop_coords = a.drop_coords;
  protocol.record_timing = !a.no_timing;

  const FeatureMatrix fm = read_feature_matrix_file(a.matrix);
  const ClassMap reference = ClassMap::from_grid(read_asc_file(a.classes));
  ensure_out_dir(a.out, {a.matrix, a.classes});
  const EvaluationReport report = run_benchmark(fm, reference, protocol);

  const fs::path dir(a.out);
  {
    auto out = open_out(dir / "report.json");
    out << report_to_json(report);
  }
  {
    auto out = open_out(dir / "plot_data.csv");
    write_plot_data_csv(out, report);
  }
  std::size_t failed = 0;
  for (const BenchmarkCell& cell : report.cells) {
    if (cell.error) {
      ++failed;
      std::cerr << "warning: " << method_name(cell.method) << " k=" << cell.k << ": " << *cell.error << '\n';
    }
  }
  std::cout << "wrote " << (dir / "report.json").string() << " (" << report.cells.size() - failed << " of "
            << report.cells.size() << " cells scored)\n";
  return (failed == report.cells.size() && failed > 0) ? kRuntimeFailure : 0;
}

// --- bench-timing ----------------------------------------------------------

struct TimingArgs {
  std::size_t rows = 64000;
  std::size_t cols = 7;
  std::size_t k = 27;
  std::size_t runs = 7;
  std::uint64_t seed = 42;
};

int run_timing(const TimingArgs& a) {
  if (a.runs < 1) throw UsageError("--runs must be >= 1");
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = unit(rng);
  }
  MaxvolOptions opts;
  opts.keep_coefficients = false;
  std::vector<double> seconds;
  for (std::size_t r = 0; r < a.runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const MaxvolResult res = maxvol_rect(x, a.k, opts);
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (res.selected.size() != a.k) throw Error("Internal", "unexpected selection size");
  }
  double mean = 0.0;
  for (double s : seconds) mean += s;
  mean /= static_cast<double>(seconds.size());
  double var = 0.0;
  for (double s : seconds) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / static_cast<double>(seconds.size()));
  std::cout << "maxvol_rect " << a.rows << " x " << a.cols << " -> " << a.k << " rows: " << mean << " s +- " << sd
            << " s per run (mean +- std. dev. of " << a.runs << " runs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-volume soil sampling designs from gridded terrain"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic site (dem.asc, classes.asc)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--spec", synth.spec_file, "Site spec as JSON");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed for the microrelief noise");
  synth_cmd->add_option("--nrows", synth.nrows, "Grid rows")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--ncols", synth.ncols, "Grid columns")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--cellsize", synth.cellsize, "Cell size in metres")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth.noise, "Microrelief noise amplitude")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--depth-threshold", synth.depth_threshold, "Depression depth for class 3");
  synth_cmd->add_option("--twi-dry", synth.twi_dry, "TWI below which cells are class 0");
  synth_cmd->add_option("--twi-wet", synth.twi_wet, "TWI above which cells are class 2");
  synth_cmd->add_option("--precision", synth.precision, "Decimal digits in dem.asc")->check(CLI::Range(0, 17));

  FeaturesArgs features;
  auto* features_cmd = app.add_subcommand("features", "Derive terrain layers and the feature matrix");
  features_cmd->add_option("--dem", features.dem, "Input DEM (.asc)")->required();
  features_cmd->add_option("--out", features.out, "Output directory")->required();
  features_cmd->add_option("--precision", features.precision, "Decimal digits in layer rasters")
      ->check(CLI::Range(0, 17));
  features_cmd->add_option("--min-tan-slope", features.min_tan_slope, "Slope clamp used by TWI")
      ->check(CLI::PositiveNumber);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Select sampling points from a feature matrix");
  sample_cmd->add_option("--matrix", sample.matrix, "Feature matrix file")->required();
  sample_cmd->add_option("--out", sample.out, "Output directory")->required();
  sample_cmd->add_option("--method", sample.method, "Sampling method")
      ->check(CLI::IsMember({"maxvol", "random", "ks", "clhs"}));
  sample_cmd->add_option("--k", sample.k, "Number of points")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--epsilon", sample.epsilon, "Minimum normalised distance (maxvol)")
      ->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--seed", sample.seed, "RNG seed (random, clhs)");
  sample_cmd->add_option("--clhs-iterations", sample.clhs_iterations, "cLHS annealing iterations")
      ->check(CLI::PositiveNumber);

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Benchmark sampling methods against a class map");
  evaluate_cmd->add_option("--matrix", evaluate.matrix, "Feature matrix file")->required();
  evaluate_cmd->add_option("--classes", evaluate.classes, "Reference class map (.asc)")->required();
  evaluate_cmd->add_option("--out", evaluate.out, "Output directory")->required();
  evaluate_cmd->add_option("--method", evaluate.methods, "Methods to benchmark")
      ->delimiter(',')
      ->check(CLI::IsMember({"maxvol", "random", "ks", "clhs"}));
  evaluate_cmd->add_option("--k-range", evaluate.k_range, "Point counts A:B (inclusive)");
  evaluate_cmd->add_option("--repetitions", evaluate.repetitions, "Repetitions of randomised methods")
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--clhs-iterations", evaluate.clhs_iterations, "cLHS annealing iterations")
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--epsilon", evaluate.epsilon, "Distance constraint for maxvol")
      ->check(CLI::NonNegativeNumber);
  evaluate_cmd->add_option("--seed", evaluate.seed, "Master seed");
  evaluate_cmd->add_flag("--drop-coords", evaluate.drop_coords, "Classify on terrain columns only");
  evaluate_cmd->add_flag("--no-timing", evaluate.no_timing, "Write time_s = 0 (byte-reproducible reports)");

  TimingArgs timing;
  auto* timing_cmd = app.add_subcommand("bench-timing", "Time maxvol_rect on a seeded random matrix");
  timing_cmd->add_option("--rows", timing.rows, "Matrix rows")->check(CLI::PositiveNumber);
  timing_cmd->add_option("--cols", timing.cols, "Matrix columns")->check(CLI::PositiveNumber);
  timing_cmd->add_option("--k", timing.k, "Rows to select")->check(CLI::PositiveNumber);
  timing_cmd->add_option("--runs", timing.runs, "Timed runs")->check(CLI::PositiveNumber);
  timing_cmd->add_option("--seed", timing.seed, "Matrix seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (features_cmd->parsed()) return run_features(features);
    if (sample_cmd->parsed()) return run_sample(sample);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate);
    if (timing_cmd->parsed()) return run_timing(timing);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DegenerateSpec& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}
