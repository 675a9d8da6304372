#pragma once

// Cross approximation (partially pivoted on implicit matrices, fully pivoted
// on explicit ones) and low-rank factor containers.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fastbem {

using Matrix = Eigen::MatrixXd;

/// Factorized block A * C * B^T, or A * B^T without a middle factor.
struct LowRankFactor {
  Matrix A;                ///< rows x k
  Matrix B;                ///< cols x k'
  std::optional<Matrix> C; ///< k x k'
  std::vector<int> row_pivots;
  std::vector<int> col_pivots;

  [[nodiscard]] int rank() const {
    return static_cast<int>(C ? std::min(C->rows(), C->cols()) : A.cols());
  }
  [[nodiscard]] Eigen::Index rows() const { return A.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return B.rows(); }

  [[nodiscard]] Matrix dense() const {
    return C ? Matrix(A * (*C) * B.transpose()) : Matrix(A * B.transpose());
  }

  /// y += F x
  template <class In, class Out> void apply_add(const In &x, Out &&y) const {
    Eigen::VectorXd z = B.transpose() * x;
    if (C) z = (*C) * z;
    y.noalias() += A * z;
  }
  /// y += F^T x
  template <class In, class Out> void apply_transpose_add(const In &x, Out &&y) const {
    Eigen::VectorXd z = A.transpose() * x;
    if (C) z = C->transpose() * z;
    y.noalias() += B * z;
  }

  [[nodiscard]] std::size_t coefficients() const {
    return static_cast<std::size_t>(A.size() + B.size() + (C ? C->size() : 0));
  }
};

enum class AcaStatus { converged, rank_deficient, max_rank };

struct AcaResult {
  LowRankFactor factor; ///< A = columns u_k, B = rows v_k, no middle factor
  AcaStatus status = AcaStatus::converged;
};

/// Partially pivoted cross approximation of an implicit rows x cols matrix.
/// Stops when the next cross satisfies |u||v| <= eps * |S_k|_F (that cross
/// is not added), or when max_rank terms have been accumulated.
inline AcaResult aca(const std::function<double(int, int)> &entry, int rows,
                     int cols, double eps, int max_rank) {
  if (!(eps > 0.0)) throw std::invalid_argument("aca: eps must be positive");
  if (max_rank < 1) throw std::invalid_argument("aca: max_rank must be >= 1");
  AcaResult res;
  std::vector<Eigen::VectorXd> us, vs;
  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  double norm2 = 0.0;
  int next_row = 0;
  const int limit = std::min({max_rank, rows, cols});
  res.status = AcaStatus::converged;
  int attempts = 0;
  while (static_cast<int>(us.size()) < limit) {
    if (next_row < 0) {
      // Every row is a pivot or has a zero residual: reproduction is exact.
      res.status = AcaStatus::converged;
      break;
    }
    const int i = next_row;
    row_used[i] = 1;
    Eigen::VectorXd v(cols);
    for (int j = 0; j < cols; ++j) v[j] = entry(i, j);
    for (std::size_t l = 0; l < us.size(); ++l) v -= us[l][i] * vs[l];
    int j = -1;
    double best = 0.0;
    for (int c = 0; c < cols; ++c)
      if (!col_used[c] && std::abs(v[c]) > best) best = std::abs(v[c]), j = c;
    auto pick_unused_row = [&](const Eigen::VectorXd *u) {
      int r = -1;
      double m = -1.0;
      for (int k = 0; k < rows; ++k)
        if (!row_used[k]) {
          const double val = u ? std::abs((*u)[k]) : 0.0;
          if (val > m) m = val, r = k;
        }
      return r;
    };
    if (j < 0) {
      // Zero residual row: try another one.
      ++attempts;
      next_row = pick_unused_row(nullptr);
      if (attempts > rows) {
        res.status = AcaStatus::rank_deficient;
        break;
      }
      continue;
    }
    Eigen::VectorXd u(rows);
    for (int r = 0; r < rows; ++r) u[r] = entry(r, j);
    for (std::size_t l = 0; l < us.size(); ++l) u -= vs[l][j] * us[l];
    u /= v[j];
    const double uu = u.squaredNorm(), vv = v.squaredNorm();
    double cross = 0.0;
    for (std::size_t l = 0; l < us.size(); ++l) cross += u.dot(us[l]) * vs[l].dot(v);
    const double new_norm2 = norm2 + 2.0 * cross + uu * vv;
    if (!us.empty() && std::sqrt(uu * vv) <= eps * std::sqrt(std::max(new_norm2, 0.0))) {
      res.status = AcaStatus::converged;
      break;
    }
    norm2 = new_norm2;
    col_used[j] = 1;
    res.factor.row_pivots.push_back(i);
    res.factor.col_pivots.push_back(j);
    us.push_back(std::move(u));
    vs.push_back(std::move(v));
    next_row = pick_unused_row(&us.back());
    if (static_cast<int>(us.size()) == limit) {
      res.status = limit == max_rank && limit < std::min(rows, cols)
                       ? AcaStatus::max_rank
                       : AcaStatus::converged;
    }
  }
  const int k = static_cast<int>(us.size());
  res.factor.A.resize(rows, k);
  res.factor.B.resize(cols, k);
  for (int l = 0; l < k; ++l) {
    res.factor.A.col(l) = us[l];
    res.factor.B.col(l) = vs[l];
  }
  return res;
}

/// Result of full-pivoted cross approximation of an explicit matrix S:
/// S ~ S(:, cols) * C * S(rows, :) with C = S(rows, cols)^{-1}.
struct CrossCore {
  std::vector<int> row_pivots; ///< tau, in selection order
  std::vector<int> col_pivots; ///< sigma, in selection order
  Matrix C;                    ///< |sigma| x |tau|
  double residual = 0.0;       ///< |S - S(:,s) C S(t,:)|_F / |S|_F
  bool rank_deficient = false;
};

/// Adds crosses until |residual|_F <= eps |S|_F.
inline CrossCore aca_inverse_core(const Matrix &S, double eps,
                                  int max_rank = -1) {
  if (!S.allFinite()) throw std::invalid_argument("aca_inverse_core: non-finite input");
  CrossCore core;
  const double snorm = S.norm();
  const int limit = static_cast<int>(
      max_rank < 0 ? std::min(S.rows(), S.cols())
                   : std::min<Eigen::Index>(max_rank, std::min(S.rows(), S.cols())));
  Matrix R = S;
  double rnorm = snorm;
  while (static_cast<int>(core.row_pivots.size()) < limit && rnorm > eps * snorm) {
    Eigen::Index i, j;
    const double piv = R.cwiseAbs().maxCoeff(&i, &j);
    if (!(piv > 1e-15 * snorm) || !(piv > 0.0)) {
      core.rank_deficient = true;
      break;
    }
    const Eigen::VectorXd col = R.col(j) / R(i, j);
    const Eigen::RowVectorXd row = R.row(i);
    R.noalias() -= col * row;
    R.row(i).setZero();
    R.col(j).setZero();
    core.row_pivots.push_back(static_cast<int>(i));
    core.col_pivots.push_back(static_cast<int>(j));
    rnorm = R.norm();
  }
  const int k = static_cast<int>(core.row_pivots.size());
  Matrix P(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) P(a, b) = S(core.row_pivots[a], core.col_pivots[b]);
  core.C = k > 0 ? Matrix(P.fullPivLu().inverse()) : Matrix(0, 0);
  core.residual = snorm > 0.0 ? rnorm / snorm : 0.0;
  return core;
}

/// Recompression by QR of both factors and an SVD of the small core; drops
/// singular values while the discarded tail stays <= eps |F|_F.
inline LowRankFactor truncate(const LowRankFactor &F, double eps) {
  const Matrix Bm = F.C ? Matrix(F.B * F.C->transpose()) : F.B;
  LowRankFactor out;
  out.row_pivots = F.row_pivots;
  out.col_pivots = F.col_pivots;
  if (F.A.cols() == 0 || Bm.cols() == 0) {
    out.A = Matrix(F.A.rows(), 0);
    out.B = Matrix(F.B.rows(), 0);
    return out;
  }
  Eigen::HouseholderQR<Matrix> qa(F.A), qb(Bm);
  const Eigen::Index ka = std::min(F.A.rows(), F.A.cols());
  const Eigen::Index kb = std::min(Bm.rows(), Bm.cols());
  const Matrix Ra = qa.matrixQR().topRows(ka).triangularView<Eigen::Upper>();
  const Matrix Rb = qb.matrixQR().topRows(kb).triangularView<Eigen::Upper>();
  const Matrix core = Ra * Rb.transpose();
  Eigen::JacobiSVD<Matrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &sv = svd.singularValues();
  const double total2 = sv.squaredNorm();
  Eigen::Index keep = sv.size();
  double tail2 = 0.0;
  while (keep > 0) {
    const double s2 = sv[keep - 1] * sv[keep - 1];
    if (sv[keep - 1] == 0.0 || tail2 + s2 <= eps * eps * total2) {
      tail2 += s2;
      --keep;
    } else {
      break;
    }
  }
  const Matrix Qa = qa.householderQ() * Matrix::Identity(F.A.rows(), ka);
  const Matrix Qb = qb.householderQ() * Matrix::Identity(Bm.rows(), kb);
  out.A = Qa * (svd.matrixU().leftCols(keep) * sv.head(keep).asDiagonal());
  out.B = Qb * svd.matrixV().leftCols(keep);
  return out;
}

} // namespace fastbem
