#include "soilmaxvol/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Maxvol: return "maxvol";
    case Method::Random: return "random";
    case Method::KennardStone: return "ks";
    case Method::Clhs: return "clhs";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  if (name == "kennard-stone") return Method::KennardStone;
  throw InvalidArgument("unknown sampling method '" + std::string(name) + "'");
}

RngSeed derive_seed(RngSeed parent, std::uint64_t stream) {
  std::uint64_t z = parent.value + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return {z ^ (z >> 31)};
}

std::vector<std::size_t> SampleDesign::rows() const {
  std::vector<std::size_t> out;
  out.reserve(points.size());
  for (const SamplePoint& p : points) out.push_back(p.matrix_row);
  return out;
}

SampleDesign make_design(const FeatureMatrix& fm, std::span<const std::size_t> rows, Method method,
                         double epsilon, std::optional<std::uint64_t> seed) {
  SampleDesign design;
  design.k = rows.size();
  design.epsilon = epsilon;
  design.method = method;
  design.seed = seed;
  design.points.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= fm.rows()) throw OutOfBounds("matrix row " + std::to_string(r) + " out of range");
    SamplePoint p;
    p.matrix_row = r;
    if (r < fm.pixel_index.size()) {
      std::tie(p.grid_row, p.grid_col) = fm.pixel_index[r];
      std::tie(p.world_x, p.world_y) = fm.geometry.cell_center(p.grid_row, p.grid_col);
    }
    design.points.push_back(p);
  }
  return design;
}

namespace {

void check_k(const FeatureMatrix& fm, std::size_t k, std::size_t lower) {
  if (k < lower || k > fm.rows()) {
    throw InvalidArgument("k = " + std::to_string(k) + " outside [" + std::to_string(lower) + ", " +
                          std::to_string(fm.rows()) + "]");
  }
}

double squared_coordinate_distance(const Matrix& x, std::size_t a, std::size_t b) {
  const Eigen::Index n = x.cols();
  const double dx = x(static_cast<Eigen::Index>(a), n - 2) - x(static_cast<Eigen::Index>(b), n - 2);
  const double dy = x(static_cast<Eigen::Index>(a), n - 1) - x(static_cast<Eigen::Index>(b), n - 1);
  return dx * dx + dy * dy;
}

}  // namespace

double min_squared_coordinate_distance(const FeatureMatrix& fm, std::span<const std::size_t> rows) {
  if (fm.cols() < 2) throw InvalidArgument("feature matrix has no coordinate columns");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      best = std::min(best, squared_coordinate_distance(fm.matrix, rows[i], rows[j]));
    }
  }
  return best;
}

SampleDesign sample_maxvol(const FeatureMatrix& fm, std::size_t k, double epsilon,
                           const MaxvolOptions& options) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  check_k(fm, k, fm.cols());
  RowVeto veto;
  if (epsilon > 0.0) {
    if (fm.cols() < 2) throw InvalidArgument("distance constraint needs coordinate columns");
    const double limit = epsilon * epsilon;
    veto = [&fm, limit](std::size_t candidate, std::span<const std::size_t> retained) {
      for (std::size_t r : retained) {
        if (squared_coordinate_distance(fm.matrix, candidate, r) < limit) return true;
      }
      return false;
    };
  }
  MaxvolOptions opts = options;
  opts.keep_coefficients = false;
  const MaxvolResult result = maxvol_rect(fm.matrix, k, opts, veto);
  return make_design(fm, result.selected, Method::Maxvol, epsilon);
}

SampleDesign sample_random(const FeatureMatrix& fm, std::size_t k, RngSeed seed) {
  check_k(fm, k, 1);
  const std::size_t m = fm.rows();
  std::mt19937_64 rng(seed.value);
  // Floyd's algorithm: k draws, uniform over k-subsets.
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> rows;
  rows.reserve(k);
  for (std::size_t j = m - k; j < m; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    rows.push_back(pick);
  }
  return make_design(fm, rows, Method::Random, 0.0, seed.value);
}

std::vector<std::size_t> kennard_stone_order(const Matrix& x, std::size_t k) {
  const Eigen::Index m = x.rows();
  if (k < 2 || k > static_cast<std::size_t>(m)) {
    throw InvalidArgument("Kennard-Stone needs 2 <= k <= m");
  }

  // Farthest pair via tiled Gram products over the upper triangle.
  const Vector norms = x.rowwise().squaredNorm();
  double best = -1.0;
  Eigen::Index bi = 0, bj = 1;
  constexpr Eigen::Index kTile = 512;
  Matrix gram(kTile, kTile);
  for (Eigen::Index r0 = 0; r0 < m; r0 += kTile) {
    const Eigen::Index rl = std::min(kTile, m - r0);
    for (Eigen::Index c0 = r0; c0 < m; c0 += kTile) {
      const Eigen::Index cl = std::min(kTile, m - c0);
      gram.topLeftCorner(rl, cl).noalias() = x.middleRows(r0, rl) * x.middleRows(c0, cl).transpose();
      for (Eigen::Index b = 0; b < cl; ++b) {
        const Eigen::Index j = c0 + b;
        const Eigen::Index a_end = std::min(rl, j - r0);
        for (Eigen::Index a = 0; a < a_end; ++a) {
          const Eigen::Index i = r0 + a;
          const double d = norms(i) + norms(j) - 2.0 * gram(a, b);
          // Lexicographic tie-break on (i, j).
          if (d > best || (d == best && (i < bi || (i == bi && j < bj)))) {
            best = d;
            bi = i;
            bj = j;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order{static_cast<std::size_t>(bi), static_cast<std::size_t>(bj)};
  order.reserve(k);
  std::vector<char> taken(static_cast<std::size_t>(m), 0);
  taken[order[0]] = taken[order[1]] = 1;
  Vector nearest = (x.rowwise() - x.row(bi)).rowwise().squaredNorm();
  nearest = nearest.cwiseMin((x.rowwise() - x.row(bj)).rowwise().squaredNorm());

  while (order.size() < k) {
    Eigen::Index pick = -1;
    double far = -1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (nearest(i) > far) {
        far = nearest(i);
        pick = i;
      }
    }
    order.push_back(static_cast<std::size_t>(pick));
    taken[static_cast<std::size_t>(pick)] = 1;
    nearest = nearest.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return order;
}

SampleDesign sample_kennard_stone(const FeatureMatrix& fm, std::size_t k) {
  check_k(fm, k, 2);
  return make_design(fm, kennard_stone_order(fm.matrix, k), Method::KennardStone);
}

// ---------------------------------------------------------------------------
// cLHS

namespace {

constexpr double kZeroVariance = 1e-12;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Matrix correlation_from_moments(const Vector& mean, const Matrix& second) {
  const Eigen::Index n = mean.size();
  Matrix cov = second - mean * mean.transpose();
  Matrix corr = Matrix::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double va = cov(a, a);
      const double vb = cov(b, b);
      const double r = (va > kZeroVariance && vb > kZeroVariance) ? cov(a, b) / std::sqrt(va * vb) : 0.0;
      corr(a, b) = corr(b, a) = r;
    }
  }
  return corr;
}

}  // namespace

Matrix correlation_matrix(const Matrix& x) {
  const Eigen::Index n = x.cols();
  const double count = static_cast<double>(x.rows());
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centred = x.rowwise() - mean;
  const Matrix cov = (centred.transpose() * centred) / count;
  Matrix corr = Matrix::Identity(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double va = cov(a, a);
      const double vb = cov(b, b);
      const double r = (va > kZeroVariance && vb > kZeroVariance) ? cov(a, b) / std::sqrt(va * vb) : 0.0;
      corr(a, b) = corr(b, a) = r;
    }
  }
  return corr;
}

ClhsModel::ClhsModel(const Matrix& x, std::size_t k) : x_(x), k_(k) {
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();
  if (k < 1 || k > static_cast<std::size_t>(m)) throw InvalidArgument("cLHS needs 1 <= k <= m");
  strata_.resize(m, n);
  std::vector<double> sorted(static_cast<std::size_t>(m));
  std::vector<double> interior(k - 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) sorted[static_cast<std::size_t>(i)] = x(i, j);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t t = 1; t < k; ++t) {
      interior[t - 1] = quantile_sorted(sorted, static_cast<double>(t) / static_cast<double>(k));
    }
    // Half-open bins [q_t, q_t+1); the last bin also takes the maximum.
    for (Eigen::Index i = 0; i < m; ++i) {
      strata_(i, j) = static_cast<int>(std::upper_bound(interior.begin(), interior.end(), x(i, j)) -
                                       interior.begin());
    }
  }
  full_corr_ = correlation_matrix(x);
}

double ClhsModel::strata_objective(std::span<const std::size_t> rows) const {
  double total = 0.0;
  std::vector<int> counts(k_);
  for (std::size_t j = 0; j < cols(); ++j) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(stratum(r, j))];
    for (int c : counts) total += std::abs(c - 1);
  }
  return total;
}

double ClhsModel::correlation_objective(std::span<const std::size_t> rows) const {
  const Matrix sample = gather_rows(x_, rows);
  return (correlation_matrix(sample) - full_corr_).cwiseAbs().sum();
}

double ClhsModel::objective(std::span<const std::size_t> rows, const ClhsOptions& options) const {
  double o = options.weight_strata * strata_objective(rows);
  if (options.weight_correlation != 0.0) o += options.weight_correlation * correlation_objective(rows);
  return o;
}

namespace {

// Incremental cLHS state: stratum counts plus first and second moments of the sample.
class ClhsState {
public:
  ClhsState(const ClhsModel& model, const ClhsOptions& options, std::vector<std::size_t> rows)
      : model_(model),
        options_(options),
        rows_(std::move(rows)),
        counts_(model.k() * model.cols(), 0),
        sum_(Vector::Zero(static_cast<Eigen::Index>(model.cols()))),
        cross_(Matrix::Zero(static_cast<Eigen::Index>(model.cols()), static_cast<Eigen::Index>(model.cols()))) {
    for (std::size_t r : rows_) add(r, +1);
  }

  const std::vector<std::size_t>& rows() const { return rows_; }

  double objective() const {
    double o1 = 0.0;
    for (int c : counts_) o1 += std::abs(c - 1);
    double o = options_.weight_strata * o1;
    if (options_.weight_correlation != 0.0) {
      const double count = static_cast<double>(rows_.size());
      const Vector mean = sum_ / count;
      const Matrix corr = correlation_from_moments(mean, cross_ / count);
      o += options_.weight_correlation * (corr - model_.full_correlation()).cwiseAbs().sum();
    }
    return o;
  }

  void replace(std::size_t position, std::size_t row) {
    add(rows_[position], -1);
    rows_[position] = row;
    add(row, +1);
  }

private:
  void add(std::size_t row, int sign) {
    const auto i = static_cast<Eigen::Index>(row);
    for (std::size_t j = 0; j < model_.cols(); ++j) {
      counts_[j * model_.k() + static_cast<std::size_t>(model_.stratum(row, j))] += sign;
    }
    const auto x = model_.data().row(i);
    if (options_.weight_correlation != 0.0) {
      sum_ += static_cast<double>(sign) * x.transpose();
      cross_.noalias() += static_cast<double>(sign) * (x.transpose() * x);
    }
  }

  const ClhsModel& model_;
  const ClhsOptions& options_;
  std::vector<std::size_t> rows_;
  std::vector<int> counts_;
  Vector sum_;
  Matrix cross_;
};

}  // namespace

ClhsRun run_clhs(const ClhsModel& model, const ClhsOptions& options, RngSeed seed) {
  if (options.iterations < 1) throw InvalidArgument("cLHS needs at least one iteration");
  const std::size_t m = model.rows();
  const std::size_t k = model.k();
  std::mt19937_64 rng(seed.value);

  std::vector<char> member(m, 0);
  std::vector<std::size_t> start;
  start.reserve(k);
  for (std::size_t j = m - k; j < m; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = member[t] ? j : t;
    member[pick] = 1;
    start.push_back(pick);
  }

  ClhsState state(model, options, start);
  ClhsRun run;
  run.initial_objective = model.objective(start, options);
  double current = state.objective();
  double best = current;
  run.rows = start;

  if (k < m) {
    std::uniform_int_distribution<std::size_t> pick_position(0, k - 1);
    std::uniform_int_distribution<std::size_t> pick_row(0, m - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double temperature = options.initial_temperature;
    for (std::size_t it = 0; it < options.iterations; ++it) {
      if (it > 0 && options.cooling_interval > 0 && it % options.cooling_interval == 0) {
        temperature *= options.cooling_factor;
      }
      const std::size_t position = pick_position(rng);
      std::size_t incoming = pick_row(rng);
      while (member[incoming]) incoming = pick_row(rng);
      const std::size_t outgoing = state.rows()[position];

      state.replace(position, incoming);
      const double proposed = state.objective();
      const double delta = proposed - current;
      const double u = unit(rng);
      if (delta <= 0.0 || (temperature > 0.0 && u < std::exp(-delta / temperature))) {
        member[outgoing] = 0;
        member[incoming] = 1;
        current = proposed;
        ++run.accepted;
        if (current < best) {
          best = current;
          run.rows = state.rows();
        }
      } else {
        state.replace(position, outgoing);
      }
    }
  }
  run.best_objective = model.objective(run.rows, options);
  return run;
}

SampleDesign sample_clhs(const FeatureMatrix& fm, std::size_t k, const ClhsOptions& options, RngSeed seed) {
  check_k(fm, k, 1);
  const ClhsModel model(fm.matrix, k);
  const ClhsRun run = run_clhs(model, options, seed);
  return make_design(fm, run.rows, Method::Clhs, 0.0, seed.value);
}

}  // namespace soilmaxvol
