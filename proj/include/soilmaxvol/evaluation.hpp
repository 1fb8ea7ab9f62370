#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soilmaxvol/maxvol.hpp"
#include "soilmaxvol/raster.hpp"
#include "soilmaxvol/samplers.hpp"
#include "soilmaxvol/terrain.hpp"

namespace soilmaxvol {

/// Raster of integer class labels.
struct ClassMap {
  RasterGrid grid;
  std::vector<int> classes;  ///< sorted distinct labels present

  /// Collects the labels; throws InvalidArgument for non-integer cells.
  static ClassMap from_grid(RasterGrid grid);
};

/// Label at each feature-matrix row. Throws InvalidArgument when a valid
/// pixel has no label or the grids are not aligned.
std::vector<int> labels_for(const ClassMap& reference, const FeatureMatrix& fm);

/// Gaussian naive Bayes.
struct NaiveBayesModel {
  std::vector<int> classes;  ///< ascending
  std::vector<double> priors;
  Matrix means;      ///< classes x features
  Matrix variances;  ///< classes x features, each >= variance_floor
  double variance_floor = 0.0;

  std::size_t features() const { return static_cast<std::size_t>(means.cols()); }
};

/// Per-class means and population variances. The variance floor is
/// `relative_smoothing` times the largest per-feature variance of the training
/// rows.
NaiveBayesModel nb_fit(const Matrix& x, std::span<const int> labels, double relative_smoothing = 1e-9);

/// Fits on a subset of rows of `x`.
NaiveBayesModel nb_fit_rows(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> rows,
                            double relative_smoothing = 1e-9);

/// Joint log-likelihoods, rows x classes.
Matrix nb_log_posteriors(const NaiveBayesModel& model, const Matrix& x);

/// Argmax of the log posteriors; ties go to the first class in model order.
std::vector<int> nb_predict(const NaiveBayesModel& model, const Matrix& x);

double accuracy(std::span<const int> y, std::span<const int> y_hat);

/// Sum of 1{y_hat_i = y_i} / (n_classes * |{k : y_k = y_i}|), i.e. the mean
/// per-class recall over the classes present in `y`.
double balanced_accuracy(std::span<const int> y, std::span<const int> y_hat);

/// Linear-interpolation percentile (p in [0, 100]).
double percentile(std::vector<double> values, double p);

struct Summary {
  double mean = 0.0;
  double p5 = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct BenchmarkProtocol {
  std::size_t k_min = 7;
  std::size_t k_max = 27;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  /// Repetitions for the randomised methods; maxvol and Kennard-Stone run once.
  std::size_t repetitions = 1000;
  ClhsOptions clhs{};
  double epsilon = 0.0;
  RngSeed seed{42};
  /// Fit the classifier on terrain columns only.
  bool drop_coords = false;
  bool record_timing = true;
};

struct BenchmarkCell {
  Method method = Method::Maxvol;
  std::size_t k = 0;
  std::size_t runs = 0;
  Summary accuracy;
  Summary balanced_accuracy;
  double time_s = 0.0;
  std::optional<std::string> error;
};

struct EvaluationReport {
  BenchmarkProtocol protocol;
  std::size_t n_pixels = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<BenchmarkCell> cells;

  const BenchmarkCell* find(Method method, std::size_t k) const;
};

/// Seed for repetition `rep` of (method, k).
RngSeed repetition_seed(RngSeed master, Method method, std::size_t k, std::size_t rep);

/// For every method and k: draw designs, fit naive Bayes on the sampled
/// pixels, predict every valid pixel and score both metrics. Failures are
/// recorded per cell.
EvaluationReport run_benchmark(const FeatureMatrix& fm, std::span<const int> labels,
                               const BenchmarkProtocol& protocol);
EvaluationReport run_benchmark(const FeatureMatrix& fm, const ClassMap& reference,
                               const BenchmarkProtocol& protocol);

}  // namespace soilmaxvol
