#pragma once

// Dense reference operator and the blockwise low-rank hierarchical matrix,
// with matvec and storage accounting.

#include "clustering.hpp"
#include "galerkin.hpp"
#include "lowrank.hpp"
#include "parallel.hpp"

#include <Eigen/Dense>

#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastbem {

using Vector = Eigen::VectorXd;

/// Coefficient counts by category, reported in bytes (8 per double).
struct StorageReport {
  std::size_t basis = 0;
  std::size_t coupling = 0;
  std::size_t lowrank = 0;
  std::size_t nearfield = 0;

  [[nodiscard]] std::size_t total() const { return basis + coupling + lowrank + nearfield; }

  StorageReport &operator+=(const StorageReport &o) {
    basis += o.basis;
    coupling += o.coupling;
    lowrank += o.lowrank;
    nearfield += o.nearfield;
    return *this;
  }

  void write_csv(std::ostream &out) const {
    out << "category,bytes\n"
        << "basis," << basis << '\n'
        << "coupling," << coupling << '\n'
        << "lowrank," << lowrank << '\n'
        << "nearfield," << nearfield << '\n'
        << "total," << total() << '\n';
  }
};

/// Rank statistics over far-field blocks or cluster bases.
struct RankStats {
  int max_rank = 0;
  double mean_rank = 0.0;
  int blocks = 0;
  int flagged = 0;
};

inline constexpr std::size_t bytes_per_coefficient = sizeof(double);

inline constexpr int default_dense_cap = 4096;

/// Entrywise Galerkin matrix in natural dof order.
inline Matrix assemble_dense(const GalerkinAssembler &assembler, KernelKind kind,
                             int cap = default_dense_cap) {
  const OperatorSpec spec = operator_spec(kind);
  const int nr = dof_count(assembler.mesh(), spec.row.space);
  const int nc = dof_count(assembler.mesh(), spec.col.space);
  if (nr > cap || nc > cap)
    throw std::length_error("dense assembly of " + std::to_string(nr) + "x" +
                            std::to_string(nc) + " exceeds the oracle cap " +
                            std::to_string(cap));
  std::vector<int> rows(nr), cols(nc);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  // Assemble in row slabs so the work parallelizes.
  const int slab = 32;
  Matrix out(nr, nc);
  parallel_for((nr + slab - 1) / slab, [&](long b) {
    const int r0 = static_cast<int>(b) * slab;
    const int r1 = std::min(nr, r0 + slab);
    out.middleRows(r0, r1 - r0) = assembler.block(
        kind, std::span<const int>(rows).subspan(r0, r1 - r0), cols);
  });
  return out;
}

inline StorageReport dense_storage(Eigen::Index rows, Eigen::Index cols) {
  StorageReport r;
  r.nearfield = static_cast<std::size_t>(rows * cols) * bytes_per_coefficient;
  return r;
}

namespace detail {
inline Vector to_permuted(const Vector &x, const std::vector<int> &perm) {
  Vector xp(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) xp[k] = x[perm[k]];
  return xp;
}
inline Vector from_permuted(const Vector &yp, const std::vector<int> &perm) {
  Vector y(yp.size());
  for (Eigen::Index k = 0; k < yp.size(); ++k) y[perm[k]] = yp[k];
  return y;
}
} // namespace detail

/// Hierarchical matrix with factorized far-field leaves and dense near-field
/// leaves.  Leaf payloads live in cluster (permuted) ordering.
class HMatrix {
public:
  HMatrix(std::shared_ptr<const ClusterTree> rows,
          std::shared_ptr<const ClusterTree> cols,
          std::shared_ptr<const BlockTree> blocks)
      : rows_(std::move(rows)), cols_(std::move(cols)), blocks_(std::move(blocks)),
        farfield_(blocks_->farfield().size()),
        nearfield_(blocks_->nearfield().size()) {}

  [[nodiscard]] int rows() const { return rows_->dof_count(); }
  [[nodiscard]] int cols() const { return cols_->dof_count(); }
  [[nodiscard]] const ClusterTree &row_tree() const { return *rows_; }
  [[nodiscard]] const ClusterTree &col_tree() const { return *cols_; }
  [[nodiscard]] const BlockTree &block_tree() const { return *blocks_; }

  /// Payload of the k-th far-field leaf (blocks().farfield()[k]).
  [[nodiscard]] LowRankFactor &farfield(std::size_t k) { return farfield_[k]; }
  [[nodiscard]] const LowRankFactor &farfield(std::size_t k) const { return farfield_[k]; }
  [[nodiscard]] Matrix &nearfield(std::size_t k) { return nearfield_[k]; }
  [[nodiscard]] const Matrix &nearfield(std::size_t k) const { return nearfield_[k]; }

  [[nodiscard]] Vector apply(const Vector &x) const { return multiply(x, false); }
  [[nodiscard]] Vector apply_transpose(const Vector &x) const { return multiply(x, true); }

  [[nodiscard]] StorageReport storage() const {
    StorageReport r;
    for (const auto &f : farfield_) r.lowrank += f.coefficients() * bytes_per_coefficient;
    // Near-field blocks are counted by their dimensions so storage can be
    // reported without computing their entries.
    for (int id : blocks_->nearfield()) {
      const Block &b = (*blocks_)[id];
      r.nearfield += static_cast<std::size_t>((*rows_)[b.row].size()) * (*cols_)[b.col].size() *
                     bytes_per_coefficient;
    }
    return r;
  }

  /// Reconstructed matrix in natural ordering.
  [[nodiscard]] Matrix dense() const {
    Matrix out = Matrix::Zero(rows(), cols());
    const auto &bl = blocks_->blocks();
    auto scatter = [&](const Block &b, const Matrix &m) {
      const auto rd = rows_->dofs(b.row);
      const auto cd = cols_->dofs(b.col);
      for (std::size_t i = 0; i < rd.size(); ++i)
        for (std::size_t j = 0; j < cd.size(); ++j) out(rd[i], cd[j]) = m(i, j);
    };
    for (std::size_t k = 0; k < farfield_.size(); ++k)
      scatter(bl[blocks_->farfield()[k]], farfield_[k].dense());
    for (std::size_t k = 0; k < nearfield_.size(); ++k)
      scatter(bl[blocks_->nearfield()[k]], nearfield_[k]);
    return out;
  }

  /// Diagonal entries (natural order); diagonal blocks are always near field.
  [[nodiscard]] Vector diagonal() const {
    if (rows_.get() != cols_.get())
      throw std::logic_error("diagonal needs identical row and column trees");
    Vector d = Vector::Zero(rows());
    const auto &bl = blocks_->blocks();
    for (std::size_t k = 0; k < nearfield_.size(); ++k) {
      const Block &b = bl[blocks_->nearfield()[k]];
      if (b.row != b.col) continue;
      const auto rd = rows_->dofs(b.row);
      for (std::size_t i = 0; i < rd.size(); ++i) d[rd[i]] = nearfield_[k](i, i);
    }
    return d;
  }

private:
  [[nodiscard]] Vector multiply(const Vector &x, bool transpose) const {
    const ClusterTree &in_tree = transpose ? *rows_ : *cols_;
    const ClusterTree &out_tree = transpose ? *cols_ : *rows_;
    if (x.size() != in_tree.dof_count())
      throw std::invalid_argument("HMatrix matvec: dimension mismatch (" +
                                  std::to_string(x.size()) + " vs " +
                                  std::to_string(in_tree.dof_count()) + ")");
    const Vector xp = detail::to_permuted(x, in_tree.perm());
    const auto &bl = blocks_->blocks();
    const std::size_t nf = farfield_.size();
    const std::size_t nn = nearfield_.size();
    std::vector<Vector> partial(nf + nn);
    parallel_for(static_cast<long>(nf + nn), [&](long k) {
      const bool far = static_cast<std::size_t>(k) < nf;
      const Block &b = bl[far ? blocks_->farfield()[k] : blocks_->nearfield()[k - nf]];
      const Cluster &ci = transpose ? (*rows_)[b.row] : (*cols_)[b.col];
      const Cluster &co = transpose ? (*cols_)[b.col] : (*rows_)[b.row];
      const auto xs = xp.segment(ci.begin, ci.size());
      Vector y = Vector::Zero(co.size());
      if (far) {
        if (transpose)
          farfield_[k].apply_transpose_add(xs, y);
        else
          farfield_[k].apply_add(xs, y);
      } else {
        const Matrix &m = nearfield_[k - nf];
        if (transpose)
          y.noalias() += m.transpose() * xs;
        else
          y.noalias() += m * xs;
      }
      partial[k] = std::move(y);
    });
    Vector yp = Vector::Zero(out_tree.dof_count());
    for (std::size_t k = 0; k < nf + nn; ++k) {
      const Block &b = bl[k < nf ? blocks_->farfield()[k] : blocks_->nearfield()[k - nf]];
      const Cluster &co = transpose ? (*cols_)[b.col] : (*rows_)[b.row];
      yp.segment(co.begin, co.size()) += partial[k];
    }
    return detail::from_permuted(yp, out_tree.perm());
  }

  std::shared_ptr<const ClusterTree> rows_, cols_;
  std::shared_ptr<const BlockTree> blocks_;
  std::vector<LowRankFactor> farfield_;
  std::vector<Matrix> nearfield_;
};

/// Fills every near-field leaf with exact Galerkin entries.
template <class Target>
void assemble_nearfield(Target &target, const GalerkinAssembler &assembler,
                        KernelKind kind) {
  const BlockTree &bt = target.block_tree();
  const auto &near = bt.nearfield();
  parallel_for(static_cast<long>(near.size()), [&](long k) {
    const Block &b = bt[near[k]];
    target.nearfield(k) = assembler.block(kind, target.row_tree().dofs(b.row),
                                          target.col_tree().dofs(b.col));
  });
}

} // namespace fastbem
