#pragma once

// Maximum-volume row selection over tall dense matrices.
//
// maxvol_square picks n rows of an m x n matrix whose n x n submatrix has a
// locally maximal |det|, by row swaps driven by the coefficient matrix
// C = A * inv(A_sel). maxvol_rect grows that selection greedily to K > n rows,
// each time adding the row with the largest squared norm of its row of
// C = A * pinv(A_sel). Both keep C current with rank-one updates and refresh it
// from scratch every `refresh_interval` updates.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace soilmaxvol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Veto hook consulted before a row is admitted. `retained` holds the rows that
/// stay selected if the candidate is admitted. Returning true discards the
/// candidate for the rest of the run.
using RowVeto = std::function<bool(std::size_t candidate, std::span<const std::size_t> retained)>;

struct MaxvolOptions {
  /// Square phase stops once every |C_ij| <= tol. Must be >= 1.
  double tol = 1.05;
  /// Square phase swap budget; defaults to 10 * m.
  std::optional<std::size_t> max_swaps;
  /// Number of rank-one updates between full recomputations of C.
  std::size_t refresh_interval = 64;
  /// Drop the m x K coefficient matrix from the result (large inputs).
  bool keep_coefficients = true;
};

struct MaxvolResult {
  /// Selected rows in selection order. The first n come from the square phase.
  std::vector<std::size_t> selected;
  /// m x K matrix with A = coefficients * A(selected, :). Rows at the
  /// selected indices hold the K x K identity.
  Matrix coefficients;
  /// vol1 of the selected submatrix when K = n, vol2 when K > n.
  double volume = 0.0;
  /// Accepted row swaps in the square phase.
  std::size_t swaps = 0;
  /// False when the square phase ran out of its swap budget.
  bool converged = true;
  /// Volume after initialization, after each swap and after each addition.
  std::vector<double> volume_trace;
};

/// |det(M)| via partial-pivoted LU. Singular input gives 0.
double vol_square(const Matrix& m);

/// sqrt(det(M^T M)) for a K x n matrix with K >= n. Rank-deficient input gives 0.
double vol_rect(const Matrix& m);

/// Rows of `a` at `rows`, in that order.
Matrix gather_rows(const Matrix& a, std::span<const std::size_t> rows);

MaxvolResult maxvol_square(const Matrix& a, const MaxvolOptions& options = {},
                           const RowVeto& veto = nullptr);

MaxvolResult maxvol_rect(const Matrix& a, std::size_t k_points, const MaxvolOptions& options = {},
                         const RowVeto& veto = nullptr);

}  // namespace soilmaxvol
