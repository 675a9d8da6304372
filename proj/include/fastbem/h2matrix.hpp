#pragma once

// Nested cluster bases and the H2-matrix built on them.

#include "hmatrix.hpp"

#include <memory>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastbem {

/// Per-cluster basis with leaf matrices V_t and transfer matrices E_t' that
/// link a child t' to its parent t:  V_t|_t' = V_t' E_t'.
class ClusterBasis {
public:
  explicit ClusterBasis(std::shared_ptr<const ClusterTree> tree)
      : tree_(std::move(tree)), leaf_(tree_->size()), transfer_(tree_->size()),
        pivots_(tree_->size()) {}

  [[nodiscard]] const ClusterTree &tree() const { return *tree_; }
  [[nodiscard]] std::shared_ptr<const ClusterTree> tree_ptr() const { return tree_; }

  [[nodiscard]] int rank(int t) const { return static_cast<int>(pivots_[t].size()); }
  /// Pivot dofs t-hat (natural indices), in basis column order.
  [[nodiscard]] const std::vector<int> &pivots(int t) const { return pivots_[t]; }
  [[nodiscard]] std::vector<int> &pivots(int t) { return pivots_[t]; }
  /// |t| x k_t, rows in the cluster's permuted order.  Leaves only.
  [[nodiscard]] const Matrix &leaf_matrix(int t) const { return leaf_[t]; }
  [[nodiscard]] Matrix &leaf_matrix(int t) { return leaf_[t]; }
  /// k_t' x k_parent.  Non-root clusters only.
  [[nodiscard]] const Matrix &transfer(int t) const { return transfer_[t]; }
  [[nodiscard]] Matrix &transfer(int t) { return transfer_[t]; }

  /// Expands V_t through the transfer matrices (rows in permuted order of t).
  [[nodiscard]] Matrix explicit_basis(int t) const {
    const Cluster &c = (*tree_)[t];
    if (c.is_leaf()) return leaf_[t];
    Matrix v(c.size(), rank(t));
    for (int child : c.children) {
      const Cluster &cc = (*tree_)[child];
      v.middleRows(cc.begin - c.begin, cc.size()) = explicit_basis(child) * transfer_[child];
    }
    return v;
  }

  /// x-hat_t = V_t^T x|_t for every cluster, bottom-up.  `x` is permuted.
  [[nodiscard]] std::vector<Vector> forward(const Vector &x) const {
    std::vector<Vector> xh(tree_->size());
    const auto &levels = tree_->levels();
    for (int l = static_cast<int>(levels.size()) - 1; l >= 0; --l) {
      parallel_for(static_cast<long>(levels[l].size()), [&](long k) {
        const int t = levels[l][k];
        const Cluster &c = (*tree_)[t];
        if (c.is_leaf()) {
          xh[t] = leaf_[t].transpose() * x.segment(c.begin, c.size());
        } else {
          xh[t] = Vector::Zero(rank(t));
          for (int child : c.children) xh[t].noalias() += transfer_[child].transpose() * xh[child];
        }
      });
    }
    return xh;
  }

  /// Adds V_t y-hat_t for every cluster to the permuted vector y, top-down.
  void backward(std::vector<Vector> yh, Vector &y) const {
    const auto &levels = tree_->levels();
    for (std::size_t l = 0; l < levels.size(); ++l) {
      parallel_for(static_cast<long>(levels[l].size()), [&](long k) {
        const int t = levels[l][k];
        const Cluster &c = (*tree_)[t];
        if (yh[t].size() == 0) return;
        if (c.is_leaf()) {
          y.segment(c.begin, c.size()).noalias() += leaf_[t] * yh[t];
        } else {
          for (int child : c.children) {
            if (yh[child].size() == 0) yh[child] = Vector::Zero(rank(child));
            yh[child].noalias() += transfer_[child] * yh[t];
          }
        }
      });
    }
  }

  [[nodiscard]] std::size_t coefficients() const {
    std::size_t n = 0;
    for (int t = 0; t < tree_->size(); ++t)
      n += static_cast<std::size_t>(leaf_[t].size() + transfer_[t].size());
    return n;
  }

  /// Coefficients needed to represent V_t for the clusters marked in
  /// `active` (which must be closed under taking children).
  [[nodiscard]] std::size_t coefficients(const std::vector<char> &active) const {
    std::size_t n = 0;
    for (int t = 0; t < tree_->size(); ++t) {
      if (!active[t]) continue;
      n += static_cast<std::size_t>(leaf_[t].size());
      for (int child : (*tree_)[t].children)
        if (child >= 0) n += static_cast<std::size_t>(transfer_[child].size());
    }
    return n;
  }

private:
  std::shared_ptr<const ClusterTree> tree_;
  std::vector<Matrix> leaf_;
  std::vector<Matrix> transfer_;
  std::vector<std::vector<int>> pivots_;
};

/// Far-field leaves are V_t S_ts W_s^T with shared nested bases; near-field
/// leaves are dense.
class H2Matrix {
public:
  H2Matrix(std::shared_ptr<const ClusterBasis> row_basis,
           std::shared_ptr<const ClusterBasis> col_basis,
           std::shared_ptr<const BlockTree> blocks)
      : rb_(std::move(row_basis)), cb_(std::move(col_basis)), blocks_(std::move(blocks)),
        coupling_(blocks_->farfield().size()), nearfield_(blocks_->nearfield().size()) {}

  [[nodiscard]] int rows() const { return rb_->tree().dof_count(); }
  [[nodiscard]] int cols() const { return cb_->tree().dof_count(); }
  [[nodiscard]] const ClusterTree &row_tree() const { return rb_->tree(); }
  [[nodiscard]] const ClusterTree &col_tree() const { return cb_->tree(); }
  [[nodiscard]] const BlockTree &block_tree() const { return *blocks_; }
  [[nodiscard]] const ClusterBasis &row_basis() const { return *rb_; }
  [[nodiscard]] const ClusterBasis &col_basis() const { return *cb_; }
  [[nodiscard]] std::shared_ptr<const ClusterBasis> row_basis_ptr() const { return rb_; }
  [[nodiscard]] std::shared_ptr<const ClusterBasis> col_basis_ptr() const { return cb_; }

  /// Coupling matrix of the k-th far-field leaf (k_t x k_s).
  [[nodiscard]] Matrix &coupling(std::size_t k) { return coupling_[k]; }
  [[nodiscard]] const Matrix &coupling(std::size_t k) const { return coupling_[k]; }
  [[nodiscard]] Matrix &nearfield(std::size_t k) { return nearfield_[k]; }
  [[nodiscard]] const Matrix &nearfield(std::size_t k) const { return nearfield_[k]; }

  [[nodiscard]] Vector apply(const Vector &x) const { return multiply(x, false); }
  [[nodiscard]] Vector apply_transpose(const Vector &x) const { return multiply(x, true); }

  /// Clusters whose basis is reached from some far-field block: the block's
  /// own cluster and all of its descendants.
  [[nodiscard]] std::vector<char> active_clusters(bool row_side) const {
    const ClusterTree &tree = row_side ? row_tree() : col_tree();
    std::vector<char> active(tree.size(), 0);
    for (int id : blocks_->farfield())
      active[row_side ? (*blocks_)[id].row : (*blocks_)[id].col] = 1;
    for (const auto &level : tree.levels())
      for (int t : level)
        if (active[t])
          for (int child : tree[t].children)
            if (child >= 0) active[child] = 1;
    return active;
  }

  /// Bytes of this matrix.  Only the used part of each basis is counted, and
  /// a basis shared by rows and columns counts once.
  [[nodiscard]] StorageReport storage() const {
    StorageReport r;
    std::vector<char> ra = active_clusters(true);
    if (cb_ == rb_) {
      const std::vector<char> ca = active_clusters(false);
      for (std::size_t t = 0; t < ra.size(); ++t) ra[t] |= ca[t];
      r.basis = rb_->coefficients(ra) * bytes_per_coefficient;
    } else {
      r.basis = (rb_->coefficients(ra) + cb_->coefficients(active_clusters(false))) *
                bytes_per_coefficient;
    }
    for (const auto &s : coupling_)
      r.coupling += static_cast<std::size_t>(s.size()) * bytes_per_coefficient;
    // Near-field blocks are counted by their dimensions so storage can be
    // reported without computing their entries.
    for (int id : blocks_->nearfield()) {
      const Block &b = (*blocks_)[id];
      r.nearfield += static_cast<std::size_t>(row_tree()[b.row].size()) * col_tree()[b.col].size() *
                     bytes_per_coefficient;
    }
    return r;
  }

  [[nodiscard]] Matrix dense() const {
    Matrix out = Matrix::Zero(rows(), cols());
    const auto &bl = blocks_->blocks();
    auto scatter = [&](const Block &b, const Matrix &m) {
      const auto rd = row_tree().dofs(b.row);
      const auto cd = col_tree().dofs(b.col);
      for (std::size_t i = 0; i < rd.size(); ++i)
        for (std::size_t j = 0; j < cd.size(); ++j) out(rd[i], cd[j]) = m(i, j);
    };
    for (std::size_t k = 0; k < coupling_.size(); ++k) {
      const Block &b = bl[blocks_->farfield()[k]];
      scatter(b, rb_->explicit_basis(b.row) * coupling_[k] *
                     cb_->explicit_basis(b.col).transpose());
    }
    for (std::size_t k = 0; k < nearfield_.size(); ++k)
      scatter(bl[blocks_->nearfield()[k]], nearfield_[k]);
    return out;
  }

  [[nodiscard]] Vector diagonal() const {
    if (&row_tree() != &col_tree())
      throw std::logic_error("diagonal needs identical row and column trees");
    Vector d = Vector::Zero(rows());
    const auto &bl = blocks_->blocks();
    for (std::size_t k = 0; k < nearfield_.size(); ++k) {
      const Block &b = bl[blocks_->nearfield()[k]];
      if (b.row != b.col) continue;
      const auto rd = row_tree().dofs(b.row);
      for (std::size_t i = 0; i < rd.size(); ++i) d[rd[i]] = nearfield_[k](i, i);
    }
    return d;
  }

private:
  [[nodiscard]] Vector multiply(const Vector &x, bool transpose) const {
    const ClusterBasis &in_basis = transpose ? *rb_ : *cb_;
    const ClusterBasis &out_basis = transpose ? *cb_ : *rb_;
    const ClusterTree &in_tree = in_basis.tree();
    const ClusterTree &out_tree = out_basis.tree();
    if (x.size() != in_tree.dof_count())
      throw std::invalid_argument("H2Matrix matvec: dimension mismatch (" +
                                  std::to_string(x.size()) + " vs " +
                                  std::to_string(in_tree.dof_count()) + ")");
    const Vector xp = detail::to_permuted(x, in_tree.perm());
    const auto &bl = blocks_->blocks();
    const auto &far = blocks_->farfield();
    const auto &near = blocks_->nearfield();

    const std::vector<Vector> xh = in_basis.forward(xp);
    std::vector<Vector> partial(far.size() + near.size());
    parallel_for(static_cast<long>(partial.size()), [&](long k) {
      const std::size_t kk = static_cast<std::size_t>(k);
      if (kk < far.size()) {
        const Block &b = bl[far[kk]];
        const int in = transpose ? b.row : b.col;
        partial[kk] = transpose ? Vector(coupling_[kk].transpose() * xh[in])
                                : Vector(coupling_[kk] * xh[in]);
      } else {
        const Block &b = bl[near[kk - far.size()]];
        const Cluster &ci = transpose ? in_tree[b.row] : in_tree[b.col];
        const Matrix &m = nearfield_[kk - far.size()];
        const auto xs = xp.segment(ci.begin, ci.size());
        partial[kk] = transpose ? Vector(m.transpose() * xs) : Vector(m * xs);
      }
    });

    std::vector<Vector> yh(out_tree.size());
    Vector yp = Vector::Zero(out_tree.dof_count());
    for (std::size_t k = 0; k < partial.size(); ++k) {
      if (k < far.size()) {
        const Block &b = bl[far[k]];
        const int out = transpose ? b.col : b.row;
        if (yh[out].size() == 0) yh[out] = Vector::Zero(out_basis.rank(out));
        yh[out] += partial[k];
      } else {
        const Block &b = bl[near[k - far.size()]];
        const Cluster &co = transpose ? out_tree[b.col] : out_tree[b.row];
        yp.segment(co.begin, co.size()) += partial[k];
      }
    }
    out_basis.backward(std::move(yh), yp);
    return detail::from_permuted(yp, out_tree.perm());
  }

  std::shared_ptr<const ClusterBasis> rb_, cb_;
  std::shared_ptr<const BlockTree> blocks_;
  std::vector<Matrix> coupling_;
  std::vector<Matrix> nearfield_;
};

/// Storage of several H2 matrices with every distinct cluster basis counted
/// once, over the union of the clusters each matrix uses.
inline StorageReport combined_storage(const std::vector<const H2Matrix *> &ops) {
  StorageReport r;
  std::map<const ClusterBasis *, std::vector<char>> used;
  auto merge = [&](const ClusterBasis *b, const std::vector<char> &a) {
    auto &u = used[b];
    if (u.empty()) u.assign(a.size(), 0);
    for (std::size_t t = 0; t < a.size(); ++t) u[t] |= a[t];
  };
  for (const H2Matrix *op : ops) {
    StorageReport s = op->storage();
    s.basis = 0;
    r += s;
    merge(&op->row_basis(), op->active_clusters(true));
    merge(&op->col_basis(), op->active_clusters(false));
  }
  for (const auto &[b, a] : used) r.basis += b->coefficients(a) * bytes_per_coefficient;
  return r;
}

} // namespace fastbem
