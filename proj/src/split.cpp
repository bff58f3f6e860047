#include "creditboost/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "creditboost/errors.hpp"

namespace creditboost {

namespace {

constexpr double kRelativeTieTolerance = 1e-10;

}  // namespace

void TreeGrowthParams::validate() const {
  if (num_leaves < 1) throw InvalidArgument("num_leaves must be >= 1");
  if (min_data_in_leaf < 1) throw InvalidArgument("min_data_in_leaf must be >= 1");
  if (!(lambda_l2 >= 0.0)) throw InvalidArgument("lambda_l2 must be >= 0");
  if (!(min_gain_to_split >= 0.0)) throw InvalidArgument("min_gain_to_split must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
}

double split_gain(double left_grad, double left_hess, double right_grad, double right_hess,
                  double lambda_l2) {
  const double g = left_grad + right_grad;
  const double h = left_hess + right_hess;
  return 0.5 * (left_grad * left_grad / (left_hess + lambda_l2) +
                right_grad * right_grad / (right_hess + lambda_l2) -
                g * g / (h + lambda_l2));
}

double leaf_weight(double grad, double hess, double lambda_l2) {
  const double denom = hess + lambda_l2;
  return denom > 0.0 ? -grad / denom : 0.0;
}

bool gain_beats(double gain, double incumbent) {
  return gain > incumbent + kRelativeTieTolerance * std::abs(incumbent);
}

std::optional<SplitCandidate> best_split_from_histogram(const Histogram& h, double node_grad,
                                                        double node_hess,
                                                        const TreeGrowthParams& params,
                                                        std::size_t feature) {
  const std::int64_t node_count = h.total().count;
  const auto min_leaf = static_cast<std::int64_t>(params.min_data_in_leaf);
  if (node_count < 2 * min_leaf || h.size() < 2) return std::nullopt;

  std::optional<SplitCandidate> best;
  double left_grad = 0.0;
  double left_hess = 0.0;
  std::int64_t left_count = 0;
  // The last bin cannot be a threshold: everything would go left.
  for (std::size_t b = 0; b + 1 < h.size(); ++b) {
    left_grad += h[b].grad;
    left_hess += h[b].hess;
    left_count += h[b].count;
    const std::int64_t right_count = node_count - left_count;
    if (left_count < min_leaf) continue;
    if (right_count < min_leaf) break;
    const double right_grad = node_grad - left_grad;
    const double right_hess = node_hess - left_hess;
    const double gain = split_gain(left_grad, left_hess, right_grad, right_hess,
                                   params.lambda_l2);
    if (!(gain > params.min_gain_to_split)) continue;
    if (best && !gain_beats(gain, best->gain)) continue;
    SplitCandidate c;
    c.feature = feature;
    c.bin_threshold = static_cast<int>(b);
    c.gain = gain;
    c.left_count = static_cast<std::size_t>(left_count);
    c.right_count = static_cast<std::size_t>(right_count);
    c.left_grad = left_grad;
    c.left_hess = left_hess;
    c.right_grad = right_grad;
    c.right_hess = right_hess;
    best = c;
  }
  return best;
}

std::optional<SplitCandidate> best_split_presorted(const Dataset& d,
                                                   std::span<const std::size_t> rows,
                                                   std::span<const double> grad,
                                                   std::span<const double> hess,
                                                   const TreeGrowthParams& params,
                                                   std::span<const std::size_t> features) {
  const std::size_t n = rows.size();
  const auto min_leaf = static_cast<std::size_t>(params.min_data_in_leaf);
  if (n < 2 * min_leaf) return std::nullopt;

  double node_grad = 0.0;
  double node_hess = 0.0;
  for (const auto r : rows) {
    node_grad += grad[r];
    node_hess += hess[r];
  }

  std::vector<std::size_t> all_features;
  if (features.empty()) {
    all_features.resize(d.n_cols());
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});
    features = all_features;
  }

  std::optional<SplitCandidate> best;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (const std::size_t f : features) {
    const auto col = d.column(f);
    order.assign(rows.begin(), rows.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });

    // Sum each run of equal values on its own before adding it to the running
    // left totals, mirroring per-bin accumulation.
    double left_grad = 0.0;
    double left_hess = 0.0;
    std::size_t left_count = 0;
    std::size_t i = 0;
    while (i < n) {
      const double value = col[order[i]];
      double run_grad = 0.0;
      double run_hess = 0.0;
      std::size_t j = i;
      while (j < n && col[order[j]] == value) {
        run_grad += grad[order[j]];
        run_hess += hess[order[j]];
        ++j;
      }
      left_grad += run_grad;
      left_hess += run_hess;
      left_count += j - i;
      i = j;
      if (i == n) break;
      const std::size_t right_count = n - left_count;
      if (left_count < min_leaf) continue;
      if (right_count < min_leaf) break;
      const double right_grad = node_grad - left_grad;
      const double right_hess = node_hess - left_hess;
      const double gain = split_gain(left_grad, left_hess, right_grad, right_hess,
                                     params.lambda_l2);
      if (!(gain > params.min_gain_to_split)) continue;
      if (best && !gain_beats(gain, best->gain)) continue;
      const double next = col[order[i]];
      SplitCandidate c;
      c.feature = f;
      c.bin_threshold = -1;
      c.left_upper = value;
      c.threshold = value + (next - value) / 2.0;
      if (!(c.threshold < next)) c.threshold = value;
      c.gain = gain;
      c.left_count = left_count;
      c.right_count = right_count;
      c.left_grad = left_grad;
      c.left_hess = left_hess;
      c.right_grad = right_grad;
      c.right_hess = right_hess;
      best = c;
    }
  }
  return best;
}

}  // namespace creditboost
