#include "soilmaxvol/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

ClassMap ClassMap::from_grid(RasterGrid grid) {
  std::set<int> seen;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.is_nodata_index(i)) continue;
    const double v = grid.values()[i];
    if (v != std::round(v)) throw InvalidArgument("class map holds a non-integer label");
    seen.insert(static_cast<int>(v));
  }
  if (seen.empty()) throw EmptyInput("class map has no labelled cells");
  return {std::move(grid), std::vector<int>(seen.begin(), seen.end())};
}

std::vector<int> labels_for(const ClassMap& reference, const FeatureMatrix& fm) {
  if (!(reference.grid.geometry() == fm.geometry)) {
    throw ShapeMismatch("class map is not aligned with the feature grid");
  }
  std::vector<int> out;
  out.reserve(fm.rows());
  for (const auto& [r, c] : fm.pixel_index) {
    if (reference.grid.is_nodata(r, c)) {
      throw InvalidArgument("valid pixel (" + std::to_string(r) + ", " + std::to_string(c) +
                            ") has no reference label");
    }
    out.push_back(static_cast<int>(reference.grid(r, c)));
  }
  return out;
}

NaiveBayesModel nb_fit_rows(const Matrix& x, std::span<const int> labels, std::span<const std::size_t> rows,
                            double relative_smoothing) {
  if (labels.size() != static_cast<std::size_t>(x.rows())) {
    throw LengthMismatch("one label per matrix row expected");
  }
  if (rows.empty()) throw EmptyTraining("no training rows");
  const Eigen::Index n = x.cols();

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r : rows) {
    if (r >= labels.size()) throw OutOfBounds("training row out of range");
    by_class[labels[r]].push_back(r);
  }

  NaiveBayesModel model;
  const auto classes = static_cast<Eigen::Index>(by_class.size());
  model.means.resize(classes, n);
  model.variances.resize(classes, n);

  const Matrix train = gather_rows(x, rows);
  const Eigen::RowVectorXd overall_mean = train.colwise().mean();
  const double overall_var = (train.rowwise() - overall_mean).array().square().colwise().mean().maxCoeff();
  model.variance_floor = relative_smoothing * (overall_var > 0.0 ? overall_var : 1.0);

  Eigen::Index c = 0;
  const double total = static_cast<double>(rows.size());
  for (const auto& [label, members] : by_class) {
    const Matrix part = gather_rows(x, members);
    const Eigen::RowVectorXd mean = part.colwise().mean();
    const Eigen::RowVectorXd var = (part.rowwise() - mean).array().square().colwise().mean();
    model.classes.push_back(label);
    model.priors.push_back(static_cast<double>(members.size()) / total);
    model.means.row(c) = mean;
    model.variances.row(c) = var.cwiseMax(model.variance_floor);
    ++c;
  }
  return model;
}

NaiveBayesModel nb_fit(const Matrix& x, std::span<const int> labels, double relative_smoothing) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return nb_fit_rows(x, labels, rows, relative_smoothing);
}

Matrix nb_log_posteriors(const NaiveBayesModel& model, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.features()) {
    throw DimensionMismatch("model has " + std::to_string(model.features()) + " features, input has " +
                            std::to_string(x.cols()));
  }
  const auto classes = static_cast<Eigen::Index>(model.classes.size());
  Matrix out(x.rows(), classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const Eigen::RowVectorXd var = model.variances.row(c);
    const double norm = std::log(model.priors[static_cast<std::size_t>(c)]) -
                        0.5 * (2.0 * std::numbers::pi * var.array()).log().sum();
    const Vector weights = (0.5 / var.array()).matrix().transpose();
    out.col(c) = norm - ((x.rowwise() - model.means.row(c)).array().square().matrix() * weights).array();
  }
  return out;
}

std::vector<int> nb_predict(const NaiveBayesModel& model, const Matrix& x) {
  const Matrix scores = nb_log_posteriors(model, x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = model.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

namespace {

void check_labels(std::span<const int> y, std::span<const int> y_hat) {
  if (y.size() != y_hat.size()) throw LengthMismatch("label vectors differ in length");
  if (y.empty()) throw EmptyInput("no labels to score");
}

}  // namespace

double accuracy(std::span<const int> y, std::span<const int> y_hat) {
  check_labels(y, y_hat);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += y[i] == y_hat[i];
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

double balanced_accuracy(std::span<const int> y, std::span<const int> y_hat) {
  check_labels(y, y_hat);
  std::map<int, std::size_t> class_size;
  for (int label : y) ++class_size[label];
  const double n_classes = static_cast<double>(class_size.size());
  double score = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == y_hat[i]) score += 1.0 / (n_classes * static_cast<double>(class_size[y[i]]));
  }
  return score;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyInput("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw EmptyInput("summary of an empty sample");
  Summary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.p5 = percentile(values, 5.0);
  s.median = percentile(values, 50.0);
  s.p95 = percentile(values, 95.0);
  return s;
}

const BenchmarkCell* EvaluationReport::find(Method method, std::size_t k) const {
  for (const BenchmarkCell& cell : cells) {
    if (cell.method == method && cell.k == k) return &cell;
  }
  return nullptr;
}

RngSeed repetition_seed(RngSeed master, Method method, std::size_t k, std::size_t rep) {
  RngSeed s = derive_seed(master, static_cast<std::uint64_t>(method));
  s = derive_seed(s, k);
  return derive_seed(s, rep);
}

EvaluationReport run_benchmark(const FeatureMatrix& fm, std::span<const int> labels,
                               const BenchmarkProtocol& protocol) {
  if (labels.size() != fm.rows()) throw LengthMismatch("one reference label per valid pixel expected");
  if (protocol.k_min > protocol.k_max) throw InvalidArgument("empty k range");
  if (protocol.repetitions < 1) throw InvalidArgument("repetitions must be >= 1");

  EvaluationReport report;
  report.protocol = protocol;
  report.n_pixels = fm.rows();
  report.n_features = fm.cols();
  report.n_classes = std::set<int>(labels.begin(), labels.end()).size();

  const Matrix predictors = protocol.drop_coords ? drop_coordinates(fm).matrix : fm.matrix;

  using Clock = std::chrono::steady_clock;
  std::optional<std::vector<std::size_t>> ks_order;
  std::optional<std::string> ks_error;

  for (Method method : protocol.methods) {
    for (std::size_t k = protocol.k_min; k <= protocol.k_max; ++k) {
      BenchmarkCell cell;
      cell.method = method;
      cell.k = k;
      std::vector<double> acc;
      std::vector<double> bacc;
      double seconds = 0.0;

      auto score = [&](std::span<const std::size_t> rows) {
        const NaiveBayesModel model = nb_fit_rows(predictors, labels, rows);
        const std::vector<int> predicted = nb_predict(model, predictors);
        acc.push_back(accuracy(labels, predicted));
        bacc.push_back(balanced_accuracy(labels, predicted));
      };
      auto timed = [&](auto&& make_rows) {
        const auto t0 = Clock::now();
        std::vector<std::size_t> rows = make_rows();
        seconds += std::chrono::duration<double>(Clock::now() - t0).count();
        return rows;
      };

      try {
        switch (method) {
          case Method::Maxvol:
            score(timed([&] { return sample_maxvol(fm, k, protocol.epsilon).rows(); }));
            break;
          case Method::KennardStone: {
            const auto rows = timed([&] {
              if (!ks_order && !ks_error) {
                try {
                  ks_order = kennard_stone_order(fm.matrix, std::min(protocol.k_max, fm.rows()));
                } catch (const Error& e) {
                  ks_error = e.what();
                }
              }
              if (ks_error) throw InvalidArgument(*ks_error);
              if (k < 2 || k > ks_order->size()) throw InvalidArgument("Kennard-Stone needs 2 <= k <= m");
              return std::vector<std::size_t>(ks_order->begin(), ks_order->begin() + static_cast<long>(k));
            });
            score(rows);
            break;
          }
          case Method::Random:
            for (std::size_t rep = 0; rep < protocol.repetitions; ++rep) {
              const RngSeed seed = repetition_seed(protocol.seed, method, k, rep);
              score(timed([&] { return sample_random(fm, k, seed).rows(); }));
            }
            break;
          case Method::Clhs: {
            if (k > fm.rows()) throw InvalidArgument("k exceeds the number of pixels");
            std::optional<ClhsModel> model;
            timed([&] {
              model.emplace(fm.matrix, k);
              return std::vector<std::size_t>{};
            });
            for (std::size_t rep = 0; rep < protocol.repetitions; ++rep) {
              const RngSeed seed = repetition_seed(protocol.seed, method, k, rep);
              score(timed([&] { return run_clhs(*model, protocol.clhs, seed).rows; }));
            }
            break;
          }
        }
        cell.runs = acc.size();
        cell.accuracy = summarize(acc);
        cell.balanced_accuracy = summarize(bacc);
      } catch (const Error& e) {
        cell.runs = acc.size();
        cell.error = e.what();
      }
      cell.time_s = protocol.record_timing ? seconds : 0.0;
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

EvaluationReport run_benchmark(const FeatureMatrix& fm, const ClassMap& reference,
                               const BenchmarkProtocol& protocol) {
  return run_benchmark(fm, labels_for(reference, fm), protocol);
}

}  // namespace soilmaxvol
