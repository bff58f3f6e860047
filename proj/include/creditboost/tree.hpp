#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "creditboost/binning.hpp"
#include "creditboost/data.hpp"
#include "creditboost/split.hpp"

namespace creditboost {

struct TreeNode {
  /// -1 marks a leaf.
  int feature = -1;
  int bin_threshold = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Leaf output (already scaled by the learning rate).
  double weight = 0.0;
  /// Training rows that reached this node at fit time.
  std::size_t count = 0;
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree stored as a flat node array; node 0 is the root and
/// children are appended in creation order.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t num_leaves() const;
  /// Depth of the deepest leaf; a single-leaf tree has depth 0.
  int depth() const;

  /// Routes by bin index (`bin_of(feature)` yields the row's bin).
  template <typename BinFn>
  double predict_by_bin(BinFn&& bin_of) const {
    int k = 0;
    while (!nodes_[static_cast<std::size_t>(k)].is_leaf()) {
      const auto& n = nodes_[static_cast<std::size_t>(k)];
      k = bin_of(static_cast<std::size_t>(n.feature)) <= n.bin_threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(k)].weight;
  }

  /// Routes by raw value against `threshold`.
  template <typename ValueFn>
  double predict_by_value(ValueFn&& value_of) const {
    int k = 0;
    while (!nodes_[static_cast<std::size_t>(k)].is_leaf()) {
      const auto& n = nodes_[static_cast<std::size_t>(k)];
      k = value_of(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(k)].weight;
  }

  double predict_binned(const BinnedDataset& bd, std::size_t row) const {
    return predict_by_bin([&](std::size_t f) { return bd.bin(row, f); });
  }
  double predict_raw(const Dataset& d, std::size_t row) const {
    return predict_by_value([&](std::size_t f) { return d.at(row, f); });
  }

  bool operator==(const Tree&) const = default;

 private:
  std::vector<TreeNode> nodes_{TreeNode{}};
};

/// Counters exposed for tests of the histogram-subtraction path.
struct GrowthStats {
  /// Per-feature histograms accumulated directly from rows.
  std::size_t direct_histograms = 0;
  /// Per-feature histograms derived as parent minus sibling.
  std::size_t subtracted_histograms = 0;
  /// Sum over direct builds of the rows scanned.
  std::size_t rows_scanned = 0;
};

/// Best-first growth on binned data: the open leaf with the largest gain is
/// split next (ties go to the earliest-created leaf) until `num_leaves` is
/// reached or no admissible split remains. The smaller child's histograms are
/// built from rows and the larger child's by subtraction from the parent.
///
/// `rows` must be sorted ascending. `features` restricts the split search
/// (empty = all).
Tree grow_tree_leafwise(const BinnedDataset& bd, std::span<const std::size_t> rows,
                        std::span<const double> grad, std::span<const double> hess,
                        const TreeGrowthParams& params,
                        std::span<const std::size_t> features = {},
                        GrowthStats* stats = nullptr);

/// The same best-first procedure driven by the exact pre-sorted split finder
/// on raw values. Serves as the reference for the histogram grower; split
/// nodes carry raw thresholds and bin_threshold = -1.
Tree grow_tree_leafwise_presorted(const Dataset& d, std::span<const std::size_t> rows,
                                  std::span<const double> grad,
                                  std::span<const double> hess,
                                  const TreeGrowthParams& params);

}  // namespace creditboost
