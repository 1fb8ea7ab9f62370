#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soilmaxvol/maxvol.hpp"
#include "soilmaxvol/terrain.hpp"

namespace soilmaxvol {

enum class Method { Maxvol, Random, KennardStone, Clhs };

/// "maxvol", "random", "ks", "clhs".
std::string_view method_name(Method method);
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::Maxvol, Method::Random, Method::KennardStone,
                                         Method::Clhs};

struct RngSeed {
  std::uint64_t value = 0;
};

/// Deterministic child seed for an independent stream (splitmix64 finaliser
/// over the parent seed and the stream index).
RngSeed derive_seed(RngSeed parent, std::uint64_t stream);

struct SamplePoint {
  std::size_t matrix_row = 0;
  std::size_t grid_row = 0;
  std::size_t grid_col = 0;
  double world_x = 0.0;
  double world_y = 0.0;
};

struct SampleDesign {
  std::vector<SamplePoint> points;
  std::size_t k = 0;
  /// Minimum separation in normalised coordinate units; 0 when unconstrained.
  double epsilon = 0.0;
  Method method = Method::Maxvol;
  std::optional<std::uint64_t> seed;

  std::vector<std::size_t> rows() const;
};

/// Builds a design from matrix rows, filling grid and world coordinates.
SampleDesign make_design(const FeatureMatrix& fm, std::span<const std::size_t> rows, Method method,
                         double epsilon = 0.0, std::optional<std::uint64_t> seed = std::nullopt);

/// Smallest squared distance between any two rows in the coordinate columns
/// (the last two). Infinity for fewer than two rows.
double min_squared_coordinate_distance(const FeatureMatrix& fm, std::span<const std::size_t> rows);

/// rect maxvol over fm.matrix. With epsilon > 0, candidates closer than
/// epsilon (normalised x, y) to a retained row are discarded, in the square
/// phase as well as the growth phase.
SampleDesign sample_maxvol(const FeatureMatrix& fm, std::size_t k, double epsilon,
                           const MaxvolOptions& options = {});

SampleDesign sample_random(const FeatureMatrix& fm, std::size_t k, RngSeed seed);

/// Rows in Kennard-Stone order: the farthest pair first, then maximin additions.
std::vector<std::size_t> kennard_stone_order(const Matrix& x, std::size_t k);
SampleDesign sample_kennard_stone(const FeatureMatrix& fm, std::size_t k);

struct ClhsOptions {
  std::size_t iterations = 10000;
  double initial_temperature = 1.0;
  double cooling_factor = 0.95;
  std::size_t cooling_interval = 100;
  double weight_strata = 1.0;
  /// 0 disables the correlation term.
  double weight_correlation = 1.0;
};

/// Per-k precomputation for cLHS: quantile strata of every column and the
/// correlation matrix of the full data. Reusable across seeds.
class ClhsModel {
public:
  ClhsModel(const Matrix& x, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(strata_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(strata_.cols()); }
  /// Stratum (0..k-1) of row i in column j.
  int stratum(std::size_t i, std::size_t j) const {
    return strata_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& data() const noexcept { return x_; }
  const Matrix& full_correlation() const noexcept { return full_corr_; }

  /// Strata term: sum over columns and strata of |count - 1|.
  double strata_objective(std::span<const std::size_t> rows) const;
  /// Correlation term: sum of |corr(sample) - corr(full)| over all entries.
  double correlation_objective(std::span<const std::size_t> rows) const;
  double objective(std::span<const std::size_t> rows, const ClhsOptions& options = {}) const;

private:
  Matrix x_;
  std::size_t k_;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> strata_;
  Matrix full_corr_;
};

/// Pearson correlation; entries involving a zero-variance column are 0 off the
/// diagonal and the diagonal is 1.
Matrix correlation_matrix(const Matrix& x);

struct ClhsRun {
  std::vector<std::size_t> rows;
  double initial_objective = 0.0;
  double best_objective = 0.0;
  std::size_t accepted = 0;
};

ClhsRun run_clhs(const ClhsModel& model, const ClhsOptions& options, RngSeed seed);

SampleDesign sample_clhs(const FeatureMatrix& fm, std::size_t k, const ClhsOptions& options, RngSeed seed);

}  // namespace soilmaxvol
