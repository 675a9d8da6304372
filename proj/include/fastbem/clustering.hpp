#pragma once

// Geometric cluster trees over basis-function supports and the
// admissibility-driven block tree.

#include "box.hpp"
#include "galerkin.hpp"

#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace fastbem {

/// Node of a cluster tree.  Indices [begin, end) refer to the tree's
/// permuted ordering.
struct Cluster {
  int begin = 0;
  int end = 0;
  int children[2] = {-1, -1};
  int parent = -1;
  int depth = 0;
  BoundingBox box;

  [[nodiscard]] bool is_leaf() const { return children[0] < 0; }
  [[nodiscard]] int size() const { return end - begin; }
};

class ClusterTree {
public:
  /// Binary bisection: split along the longest axis of the cluster box at the
  /// midpoint of the extreme dof centers, until at most `leaf_size` remain.
  ClusterTree(std::span<const BoundingBox> dof_boxes, int leaf_size)
      : leaf_size_(leaf_size), boxes_(dof_boxes.begin(), dof_boxes.end()) {
    if (leaf_size < 1) throw std::invalid_argument("leaf size must be >= 1");
    if (dof_boxes.empty())
      throw std::invalid_argument("cannot cluster an empty index set");
    perm_.resize(dof_boxes.size());
    std::iota(perm_.begin(), perm_.end(), 0);
    nodes_.reserve(4 * dof_boxes.size() / leaf_size + 4);
    build(0, static_cast<int>(perm_.size()), -1, 0);
    inverse_.resize(perm_.size());
    for (std::size_t k = 0; k < perm_.size(); ++k) inverse_[perm_[k]] = static_cast<int>(k);
    for (int c = 0; c < size(); ++c) {
      if (static_cast<int>(levels_.size()) <= nodes_[c].depth)
        levels_.resize(nodes_[c].depth + 1);
      levels_[nodes_[c].depth].push_back(c);
      if (nodes_[c].is_leaf()) leaves_.push_back(c);
    }
  }

  [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int dof_count() const { return static_cast<int>(perm_.size()); }
  [[nodiscard]] int root() const { return 0; }
  [[nodiscard]] int leaf_size() const { return leaf_size_; }
  [[nodiscard]] const Cluster &operator[](int c) const { return nodes_[c]; }
  [[nodiscard]] const std::vector<Cluster> &nodes() const { return nodes_; }
  /// perm()[k] is the natural dof stored at permuted position k.
  [[nodiscard]] const std::vector<int> &perm() const { return perm_; }
  [[nodiscard]] const std::vector<int> &inverse_perm() const { return inverse_; }
  [[nodiscard]] const std::vector<std::vector<int>> &levels() const { return levels_; }
  [[nodiscard]] const std::vector<int> &leaves() const { return leaves_; }
  [[nodiscard]] int depth() const { return static_cast<int>(levels_.size()) - 1; }
  [[nodiscard]] const BoundingBox &dof_box(int natural) const { return boxes_[natural]; }

  /// Natural dof indices of cluster c.
  [[nodiscard]] std::span<const int> dofs(int c) const {
    return {perm_.data() + nodes_[c].begin, static_cast<std::size_t>(nodes_[c].size())};
  }

private:
  int build(int begin, int end, int parent, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Cluster node;
    node.begin = begin;
    node.end = end;
    node.parent = parent;
    node.depth = depth;
    for (int k = begin; k < end; ++k) node.box.include(boxes_[perm_[k]]);
    if (end - begin > leaf_size_) {
      const int axis = [&] {
        int ax = 0;
        node.box.extent().maxCoeff(&ax);
        return ax;
      }();
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int k = begin; k < end; ++k) {
        const double c = boxes_[perm_[k]].center()[axis];
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
      int split = begin;
      if (hi > lo) {
        const double mid = 0.5 * (lo + hi);
        auto it = std::stable_partition(
            perm_.begin() + begin, perm_.begin() + end,
            [&](int d) { return boxes_[d].center()[axis] <= mid; });
        split = static_cast<int>(it - perm_.begin());
      } else {
        split = begin + (end - begin) / 2; // coincident centers
      }
      node.children[0] = build(begin, split, id, depth + 1);
      node.children[1] = build(split, end, id, depth + 1);
    }
    nodes_[id] = node;
    return id;
  }

  int leaf_size_;
  std::vector<BoundingBox> boxes_;
  std::vector<Cluster> nodes_;
  std::vector<int> perm_;
  std::vector<int> inverse_;
  std::vector<std::vector<int>> levels_;
  std::vector<int> leaves_;
};

inline std::vector<BoundingBox> support_boxes(const SurfaceMesh &mesh, Space s) {
  std::vector<BoundingBox> boxes(dof_count(mesh, s));
  for (int i = 0; i < static_cast<int>(boxes.size()); ++i)
    boxes[i] = support_box(mesh, s, i);
  return boxes;
}

inline ClusterTree build_cluster_tree(std::span<const BoundingBox> boxes, int leaf_size) {
  return ClusterTree(boxes, leaf_size);
}

/// max(diam B_t, diam B_s) <= 2 eta dist(B_t, B_s).
inline bool admissible(const BoundingBox &bt, const BoundingBox &bs, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const double dist = bt.distance(bs);
  return dist > 0.0 && std::max(bt.diameter(), bs.diameter()) <= 2.0 * eta * dist;
}

enum class BlockKind { farfield, nearfield, subdivided };

struct Block {
  int row = 0;
  int col = 0;
  BlockKind kind = BlockKind::subdivided;
  std::vector<int> children;
};

class BlockTree {
public:
  BlockTree(const ClusterTree &rows, const ClusterTree &cols, double eta)
      : eta_(eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    build(rows, cols, rows.root(), cols.root());
  }

  [[nodiscard]] double eta() const { return eta_; }
  [[nodiscard]] const std::vector<Block> &blocks() const { return blocks_; }
  [[nodiscard]] const Block &operator[](int b) const { return blocks_[b]; }
  [[nodiscard]] const std::vector<int> &farfield() const { return farfield_; }
  [[nodiscard]] const std::vector<int> &nearfield() const { return nearfield_; }

private:
  int build(const ClusterTree &rt, const ClusterTree &ct, int t, int s) {
    const int id = static_cast<int>(blocks_.size());
    blocks_.push_back({t, s, BlockKind::subdivided, {}});
    if (admissible(rt[t].box, ct[s].box, eta_)) {
      blocks_[id].kind = BlockKind::farfield;
      farfield_.push_back(id);
      return id;
    }
    const bool tl = rt[t].is_leaf(), sl = ct[s].is_leaf();
    if (tl && sl) {
      blocks_[id].kind = BlockKind::nearfield;
      nearfield_.push_back(id);
      return id;
    }
    std::vector<int> kids;
    if (tl) {
      for (int s2 : ct[s].children) kids.push_back(build(rt, ct, t, s2));
    } else if (sl) {
      for (int t2 : rt[t].children) kids.push_back(build(rt, ct, t2, s));
    } else {
      for (int t2 : rt[t].children)
        for (int s2 : ct[s].children) kids.push_back(build(rt, ct, t2, s2));
    }
    blocks_[id].children = std::move(kids);
    return id;
  }

  double eta_;
  std::vector<Block> blocks_;
  std::vector<int> farfield_;
  std::vector<int> nearfield_;
};

inline BlockTree build_block_tree(const ClusterTree &rows, const ClusterTree &cols,
                                  double eta) {
  return BlockTree(rows, cols, eta);
}

} // namespace fastbem
