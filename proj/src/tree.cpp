#include "creditboost/tree.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <utility>

#include "creditboost/errors.hpp"
#include "creditboost/histogram.hpp"

namespace creditboost {

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidArgument("a tree needs at least one node");
  const auto n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (!node.is_leaf() && (node.left <= 0 || node.left >= n || node.right <= 0 ||
                            node.right >= n)) {
      throw InvalidArgument("tree node has an out-of-range child index");
    }
  }
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  // Children always follow their parent in the array.
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& n = nodes_[k];
    if (n.is_leaf()) {
      deepest = std::max(deepest, depth[k]);
    } else {
      depth[static_cast<std::size_t>(n.left)] = depth[k] + 1;
      depth[static_cast<std::size_t>(n.right)] = depth[k] + 1;
    }
  }
  return deepest;
}

namespace {

struct OpenLeaf {
  int node = 0;
  int depth = 0;
  std::vector<std::size_t> rows;
  double grad_sum = 0.0;
  double hess_sum = 0.0;
  std::optional<SplitCandidate> best;
  /// Histogram backend only: one histogram per searched feature.
  std::vector<Histogram> histograms;
};

bool may_split(const OpenLeaf& leaf, const TreeGrowthParams& params) {
  const bool depth_ok = params.max_depth <= 0 || leaf.depth < params.max_depth;
  return depth_ok &&
         leaf.rows.size() >= 2 * static_cast<std::size_t>(params.min_data_in_leaf);
}

void sum_gradients(OpenLeaf& leaf, std::span<const double> grad,
                   std::span<const double> hess) {
  leaf.grad_sum = 0.0;
  leaf.hess_sum = 0.0;
  for (const auto r : leaf.rows) {
    leaf.grad_sum += grad[r];
    leaf.hess_sum += hess[r];
  }
}

/// Shared best-first loop. The backend decides how splits are searched and
/// how rows are routed.
template <typename Backend>
Tree grow_best_first(Backend& backend, std::span<const std::size_t> rows,
                     std::span<const double> grad, std::span<const double> hess,
                     const TreeGrowthParams& params) {
  params.validate();
  if (rows.empty()) throw InvalidArgument("cannot grow a tree on zero rows");

  std::vector<TreeNode> nodes(1);
  std::vector<OpenLeaf> open;
  {
    OpenLeaf root;
    root.rows.assign(rows.begin(), rows.end());
    sum_gradients(root, grad, hess);
    const bool splittable = params.num_leaves > 1 && may_split(root, params);
    backend.prepare_root(root, splittable);
    if (splittable) backend.find_best(root);
    open.push_back(std::move(root));
  }

  std::size_t n_leaves = 1;
  while (n_leaves < static_cast<std::size_t>(params.num_leaves)) {
    // `open` stays ordered by node index, so the first maximum found is the
    // earliest-created leaf among ties.
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (!open[i].best) continue;
      if (!pick || gain_beats(open[i].best->gain, open[*pick].best->gain)) pick = i;
    }
    if (!pick) break;

    OpenLeaf parent = std::move(open[*pick]);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(*pick));
    const SplitCandidate& split = *parent.best;

    OpenLeaf left;
    OpenLeaf right;
    left.depth = right.depth = parent.depth + 1;
    left.rows.reserve(split.left_count);
    right.rows.reserve(split.right_count);
    for (const auto r : parent.rows) {
      (backend.goes_left(r, split) ? left.rows : right.rows).push_back(r);
    }
    if (left.rows.size() != split.left_count || right.rows.size() != split.right_count) {
      throw ConsistencyError("row partition disagrees with split statistics");
    }
    sum_gradients(left, grad, hess);
    sum_gradients(right, grad, hess);

    left.node = static_cast<int>(nodes.size());
    right.node = left.node + 1;
    TreeNode& pn = nodes[static_cast<std::size_t>(parent.node)];
    pn.feature = static_cast<int>(split.feature);
    pn.bin_threshold = split.bin_threshold;
    pn.threshold = backend.raw_threshold(split);
    pn.left = left.node;
    pn.right = right.node;
    pn.gain = split.gain;
    pn.count = parent.rows.size();
    nodes.emplace_back();
    nodes.emplace_back();
    ++n_leaves;

    const bool more_leaves = n_leaves < static_cast<std::size_t>(params.num_leaves);
    const bool left_ok = more_leaves && may_split(left, params);
    const bool right_ok = more_leaves && may_split(right, params);
    backend.prepare_children(parent, left, right, left_ok, right_ok);
    if (left_ok) backend.find_best(left);
    if (right_ok) backend.find_best(right);
    open.push_back(std::move(left));
    open.push_back(std::move(right));
  }

  for (const auto& leaf : open) {
    TreeNode& n = nodes[static_cast<std::size_t>(leaf.node)];
    n.weight = params.learning_rate * leaf_weight(leaf.grad_sum, leaf.hess_sum, params.lambda_l2);
    n.count = leaf.rows.size();
  }
  return Tree(std::move(nodes));
}

class HistogramBackend {
 public:
  HistogramBackend(const BinnedDataset& bd, std::span<const double> grad,
                   std::span<const double> hess, const TreeGrowthParams& params,
                   std::span<const std::size_t> features, GrowthStats* stats)
      : bd_(bd), grad_(grad), hess_(hess), params_(params), stats_(stats) {
    if (features.empty()) {
      features_.resize(bd.n_features());
      std::iota(features_.begin(), features_.end(), std::size_t{0});
    } else {
      features_.assign(features.begin(), features.end());
    }
  }

  void prepare_root(OpenLeaf& root, bool splittable) {
    if (splittable) root.histograms = build_all(root.rows);
  }

  void prepare_children(OpenLeaf& parent, OpenLeaf& left, OpenLeaf& right, bool left_ok,
                        bool right_ok) {
    if (!left_ok && !right_ok) return;
    const bool left_smaller = left.rows.size() <= right.rows.size();
    OpenLeaf& small = left_smaller ? left : right;
    OpenLeaf& large = left_smaller ? right : left;
    const bool large_ok = left_smaller ? right_ok : left_ok;
    small.histograms = build_all(small.rows);
    if (large_ok) {
      large.histograms.resize(features_.size());
      for (std::size_t k = 0; k < features_.size(); ++k) {
        large.histograms[k] = subtract_histogram(parent.histograms[k], small.histograms[k]);
      }
      if (stats_) stats_->subtracted_histograms += features_.size();
    }
    parent.histograms.clear();
  }

  void find_best(OpenLeaf& leaf) {
    std::vector<std::optional<SplitCandidate>> per_feature(features_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(features_.size()); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      per_feature[kk] = best_split_from_histogram(leaf.histograms[kk], leaf.grad_sum,
                                                  leaf.hess_sum, params_, features_[kk]);
    }
    leaf.best.reset();
    // Fixed-order reduction: lowest feature position wins ties.
    for (auto& c : per_feature) {
      if (c && (!leaf.best || gain_beats(c->gain, leaf.best->gain))) leaf.best = c;
    }
  }

  bool goes_left(std::size_t row, const SplitCandidate& s) const {
    return bd_.bin(row, s.feature) <= s.bin_threshold;
  }

  double raw_threshold(const SplitCandidate& s) const {
    return bd_.mapper().upper_edges(s.feature)[static_cast<std::size_t>(s.bin_threshold)];
  }

 private:
  std::vector<Histogram> build_all(const std::vector<std::size_t>& rows) {
    std::vector<Histogram> out(features_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(features_.size()); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      out[kk] = build_histogram(bd_, rows, features_[kk], grad_, hess_);
    }
    if (stats_) {
      stats_->direct_histograms += features_.size();
      stats_->rows_scanned += features_.size() * rows.size();
    }
    return out;
  }

  const BinnedDataset& bd_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const TreeGrowthParams& params_;
  std::vector<std::size_t> features_;
  GrowthStats* stats_;
};

class PresortedBackend {
 public:
  PresortedBackend(const Dataset& d, std::span<const double> grad, std::span<const double> hess,
                   const TreeGrowthParams& params)
      : d_(d), grad_(grad), hess_(hess), params_(params) {}

  void prepare_root(OpenLeaf&, bool) {}
  void prepare_children(OpenLeaf&, OpenLeaf&, OpenLeaf&, bool, bool) {}

  void find_best(OpenLeaf& leaf) {
    leaf.best = best_split_presorted(d_, leaf.rows, grad_, hess_, params_);
  }

  bool goes_left(std::size_t row, const SplitCandidate& s) const {
    return d_.at(row, s.feature) <= s.threshold;
  }

  double raw_threshold(const SplitCandidate& s) const { return s.threshold; }

 private:
  const Dataset& d_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const TreeGrowthParams& params_;
};

}  // namespace

Tree grow_tree_leafwise(const BinnedDataset& bd, std::span<const std::size_t> rows,
                        std::span<const double> grad, std::span<const double> hess,
                        const TreeGrowthParams& params, std::span<const std::size_t> features,
                        GrowthStats* stats) {
  HistogramBackend backend(bd, grad, hess, params, features, stats);
  return grow_best_first(backend, rows, grad, hess, params);
}

Tree grow_tree_leafwise_presorted(const Dataset& d, std::span<const std::size_t> rows,
                                  std::span<const double> grad, std::span<const double> hess,
                                  const TreeGrowthParams& params) {
  PresortedBackend backend(d, grad, hess, params);
  return grow_best_first(backend, rows, grad, hess, params);
}

}  // namespace creditboost
