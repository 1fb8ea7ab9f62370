#include "soilmaxvol/maxvol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "soilmaxvol/error.hpp"

namespace soilmaxvol {

namespace {

void check_tall(const Matrix& a) {
  if (a.cols() < 1 || a.rows() < a.cols()) {
    throw InvalidArgument("maxvol needs an m x n matrix with m >= n >= 1, got " +
                          std::to_string(a.rows()) + " x " + std::to_string(a.cols()));
  }
  if (!a.allFinite()) throw InvalidArgument("matrix contains NaN or Inf");
}

struct PivotAttempt {
  std::vector<std::size_t> chosen;
  std::vector<Eigen::Index> blocked;  // columns left without an admissible pivot
};

// One pass of Gaussian elimination with complete pivoting. Columns in
// `priority` are eliminated first, in order. Vetoed pivots are marked in
// `discarded` and the next-best pivot is taken.
PivotAttempt pivot_attempt(const Matrix& a, const RowVeto& veto, std::vector<char>& discarded,
                           const std::vector<Eigen::Index>& priority, double threshold) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  Matrix work = a;
  std::vector<char> used(static_cast<std::size_t>(m), 0);
  std::vector<char> col_done(static_cast<std::size_t>(n), 0);
  PivotAttempt out;
  out.chosen.reserve(static_cast<std::size_t>(n));
  bool vetoed_any = false;

  for (Eigen::Index step = 0; step < n; ++step) {
    Eigen::Index only = -1;
    for (Eigen::Index j : priority) {
      if (!col_done[static_cast<std::size_t>(j)]) {
        only = j;
        break;
      }
    }
    Eigen::Index pivot = -1;
    Eigen::Index pcol = -1;
    double best = 0.0;
    for (;;) {
      pivot = -1;
      pcol = -1;
      best = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (col_done[static_cast<std::size_t>(j)] || (only >= 0 && j != only)) continue;
        for (Eigen::Index i = 0; i < m; ++i) {
          const auto r = static_cast<std::size_t>(i);
          if (used[r] || discarded[r]) continue;
          const double v = std::abs(work(i, j));
          if (v > best) {
            best = v;
            pivot = i;
            pcol = j;
          }
        }
      }
      if (pivot >= 0 && best > threshold && veto && veto(static_cast<std::size_t>(pivot), out.chosen)) {
        discarded[static_cast<std::size_t>(pivot)] = 1;
        vetoed_any = true;
        continue;
      }
      break;
    }
    if (pivot < 0 || best <= threshold) {
      if (!vetoed_any) {
        throw RankDeficient("no independent pivot row after " + std::to_string(step) +
                            " rows (largest residual " + std::to_string(best) + ")");
      }
      if (only >= 0) {
        out.blocked.push_back(only);
      } else {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (!col_done[static_cast<std::size_t>(j)]) out.blocked.push_back(j);
        }
      }
      return out;
    }
    used[static_cast<std::size_t>(pivot)] = 1;
    col_done[static_cast<std::size_t>(pcol)] = 1;
    out.chosen.push_back(static_cast<std::size_t>(pivot));
    const double p = work(pivot, pcol);
    for (Eigen::Index l = 0; l < n; ++l) {
      if (col_done[static_cast<std::size_t>(l)]) continue;
      const double f = work(pivot, l) / p;
      if (f != 0.0) work.col(l).noalias() -= f * work.col(pcol);
    }
  }
  return out;
}

// Chooses n independent starting rows. When the veto starves some columns of
// pivots, those columns are moved to the front and the pass is repeated.
std::vector<std::size_t> pivoted_rows(const Matrix& a, const RowVeto& veto,
                                      std::vector<char>& discarded) {
  const Eigen::Index n = a.cols();
  const double scale = a.cwiseAbs().maxCoeff();
  const double threshold = 1e-12 * (scale > 0.0 ? scale : 1.0);

  std::vector<Eigen::Index> priority;
  std::size_t best_count = 0;
  for (Eigen::Index attempt = 0; attempt <= n; ++attempt) {
    std::vector<char> trial = discarded;
    PivotAttempt r = pivot_attempt(a, veto, trial, priority, threshold);
    if (r.blocked.empty()) {
      discarded = std::move(trial);
      return std::move(r.chosen);
    }
    best_count = std::max(best_count, r.chosen.size());
    bool grew = false;
    for (Eigen::Index j : r.blocked) {
      if (std::find(priority.begin(), priority.end(), j) == priority.end()) {
        priority.push_back(j);
        grew = true;
        break;
      }
    }
    if (!grew) break;
  }
  throw InsufficientPoints(best_count, static_cast<std::size_t>(n));
}

// C = A * inv(A_sel).
Matrix square_coefficients(const Matrix& a, std::span<const std::size_t> rows) {
  const Matrix sub = gather_rows(a, rows);
  Eigen::PartialPivLU<Matrix> lu(sub.transpose());
  return lu.solve(a.transpose()).transpose();
}

// C = A * pinv(A_sel).
Matrix rect_coefficients(const Matrix& a, std::span<const std::size_t> rows) {
  const Matrix sub = gather_rows(a, rows);
  const Matrix pinv = sub.completeOrthogonalDecomposition().pseudoInverse();
  return a * pinv;
}

struct SquarePhase {
  std::vector<std::size_t> selected;
  Matrix coefficients;
  std::size_t swaps = 0;
  bool converged = true;
  std::vector<double> trace;
  std::size_t updates = 0;
};

SquarePhase run_square(const Matrix& a, const MaxvolOptions& options, const RowVeto& veto,
                       std::vector<char>& discarded) {
  if (options.tol < 1.0) throw InvalidArgument("maxvol tol must be >= 1");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const std::size_t max_swaps = options.max_swaps.value_or(10 * static_cast<std::size_t>(m));
  const std::size_t refresh = std::max<std::size_t>(options.refresh_interval, 1);

  SquarePhase phase;
  phase.selected = pivoted_rows(a, veto, discarded);
  phase.coefficients = square_coefficients(a, phase.selected);
  Matrix& c = phase.coefficients;

  double volume = vol_square(gather_rows(a, phase.selected));
  phase.trace.push_back(volume);

  std::vector<std::size_t> retained;
  for (;;) {
    double best = -1.0;
    Eigen::Index bi = -1;
    Eigen::Index bj = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) {
        if (discarded[static_cast<std::size_t>(i)]) continue;
        const double v = std::abs(c(i, j));
        if (v > best || (v == best && i < bi)) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0 || best <= options.tol) break;
    if (phase.swaps >= max_swaps) {
      phase.converged = false;
      break;
    }
    const auto row = static_cast<std::size_t>(bi);
    if (veto) {
      retained.clear();
      for (Eigen::Index t = 0; t < n; ++t) {
        if (t != bj) retained.push_back(phase.selected[static_cast<std::size_t>(t)]);
      }
      if (veto(row, retained)) {
        discarded[row] = 1;
        continue;
      }
    }

    const double pivot = c(bi, bj);
    const Vector column = c.col(bj);
    Eigen::RowVectorXd update = c.row(bi);
    update(bj) -= 1.0;
    c.noalias() -= column * (update / pivot);
    c.row(bi).setZero();
    c(bi, bj) = 1.0;

    phase.selected[static_cast<std::size_t>(bj)] = row;
    ++phase.swaps;
    volume *= std::abs(pivot);
    phase.trace.push_back(volume);
    if (++phase.updates % refresh == 0) c = square_coefficients(a, phase.selected);
  }
  return phase;
}

}  // namespace

double vol_square(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("vol_square needs a square matrix");
  if (m.rows() == 0) return 1.0;
  return std::abs(Eigen::PartialPivLU<Matrix>(m).determinant());
}

double vol_rect(const Matrix& m) {
  if (m.rows() < m.cols()) throw InvalidArgument("vol_rect needs K >= n rows");
  const Matrix gram = m.transpose() * m;
  if (gram.rows() == 0) return 1.0;
  const double det = Eigen::PartialPivLU<Matrix>(gram).determinant();
  return std::sqrt(std::max(det, 0.0));
}

Matrix gather_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t] >= static_cast<std::size_t>(a.rows())) throw OutOfBounds("row index out of range");
    out.row(static_cast<Eigen::Index>(t)) = a.row(static_cast<Eigen::Index>(rows[t]));
  }
  return out;
}

MaxvolResult maxvol_square(const Matrix& a, const MaxvolOptions& options, const RowVeto& veto) {
  return maxvol_rect(a, static_cast<std::size_t>(a.cols()), options, veto);
}

MaxvolResult maxvol_rect(const Matrix& a, std::size_t k_points, const MaxvolOptions& options,
                         const RowVeto& veto) {
  check_tall(a);
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const auto k = static_cast<Eigen::Index>(k_points);
  if (k < n || k > m) {
    throw InvalidArgument("k_points must satisfy n <= k <= m (n = " + std::to_string(n) +
                          ", m = " + std::to_string(m) + ", k = " + std::to_string(k_points) + ")");
  }

  std::vector<char> discarded(static_cast<std::size_t>(m), 0);
  SquarePhase square;
  try {
    square = run_square(a, options, veto, discarded);
  } catch (const InsufficientPoints& e) {
    throw InsufficientPoints(e.achieved(), k_points);
  }

  MaxvolResult result;
  result.swaps = square.swaps;
  result.converged = square.converged;
  result.volume_trace = std::move(square.trace);
  result.selected = std::move(square.selected);

  Matrix c;
  if (k == n) {
    c = std::move(square.coefficients);
  } else {
    const std::size_t refresh = std::max<std::size_t>(options.refresh_interval, 1);
    std::size_t updates = square.updates;
    c.resize(m, k);
    c.leftCols(n) = square.coefficients;
    square.coefficients.resize(0, 0);

    Vector scores = c.leftCols(n).rowwise().squaredNorm();
    std::vector<char> taken(static_cast<std::size_t>(m), 0);
    for (std::size_t r : result.selected) taken[r] = 1;
    double volume = result.volume_trace.back();

    for (Eigen::Index s = n; s < k;) {
      Eigen::Index best_row = -1;
      double best = -1.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto r = static_cast<std::size_t>(i);
        if (taken[r] || discarded[r]) continue;
        if (scores(i) > best) {
          best = scores(i);
          best_row = i;
        }
      }
      if (best_row < 0) throw InsufficientPoints(result.selected.size(), k_points);
      const auto row = static_cast<std::size_t>(best_row);
      if (veto && veto(row, result.selected)) {
        discarded[row] = 1;
        continue;
      }

      const double gain = std::max(scores(best_row), 0.0);
      const Eigen::RowVectorXd coeff = c.row(best_row).head(s);
      const Vector projected = c.leftCols(s) * coeff.transpose();
      c.leftCols(s).noalias() -= projected * (coeff / (1.0 + gain));
      c.col(s) = projected / (1.0 + gain);
      scores -= projected.cwiseAbs2() / (1.0 + gain);

      taken[row] = 1;
      result.selected.push_back(row);
      volume *= std::sqrt(1.0 + gain);
      result.volume_trace.push_back(volume);
      ++s;
      if (++updates % refresh == 0) {
        c.leftCols(s) = rect_coefficients(a, result.selected);
        scores = c.leftCols(s).rowwise().squaredNorm();
      }
    }
  }

  const Matrix chosen = gather_rows(a, result.selected);
  result.volume = (k == n) ? vol_square(chosen) : vol_rect(chosen);

  if (options.keep_coefficients) {
    for (Eigen::Index t = 0; t < k; ++t) {
      const auto r = static_cast<Eigen::Index>(result.selected[static_cast<std::size_t>(t)]);
      c.row(r).setZero();
      c(r, t) = 1.0;
    }
    result.coefficients = std::move(c);
  }
  return result;
}

}  // namespace soilmaxvol
