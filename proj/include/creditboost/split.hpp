#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "creditboost/data.hpp"
#include "creditboost/histogram.hpp"

namespace creditboost {

/// Knobs that shape a single tree. A BoosterParams maps onto this; CART and
/// random forests fill it directly.
struct TreeGrowthParams {
  int num_leaves = 31;
  /// <= 0 means unbounded.
  int max_depth = -1;
  int min_data_in_leaf = 20;
  double lambda_l2 = 0.0;
  double min_gain_to_split = 0.0;
  /// Multiplies every leaf weight at storage time.
  double learning_rate = 1.0;

  void validate() const;
};

struct SplitCandidate {
  std::size_t feature = 0;
  /// Rows with bin <= bin_threshold go left. -1 for raw-value splits.
  int bin_threshold = -1;
  /// Rows with value <= threshold go left.
  double threshold = 0.0;
  /// Largest raw value sent left (raw-value splits only).
  double left_upper = 0.0;
  double gain = 0.0;
  std::size_t left_count = 0;
  std::size_t right_count = 0;
  double left_grad = 0.0;
  double left_hess = 0.0;
  double right_grad = 0.0;
  double right_hess = 0.0;
};

/// Second-order gain with L2 leaf regularization:
///   0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)]
double split_gain(double left_grad, double left_hess, double right_grad, double right_hess,
                  double lambda_l2);

/// Leaf output -G/(H+l), before any learning-rate scaling.
double leaf_weight(double grad, double hess, double lambda_l2);

/// True when `gain` beats `incumbent` by more than floating-point noise.
/// Near-equal gains count as ties so the earlier candidate is kept.
bool gain_beats(double gain, double incumbent);

/// Scans every bin threshold of one feature's histogram. Returns nullopt when
/// no admissible threshold has gain > min_gain_to_split.
std::optional<SplitCandidate> best_split_from_histogram(const Histogram& h, double node_grad,
                                                        double node_hess,
                                                        const TreeGrowthParams& params,
                                                        std::size_t feature = 0);

/// Exact split search on raw values: each feature's rows are sorted and every
/// boundary between distinct values is scored. `features` restricts the scan
/// (empty = all columns). `rows` may contain repeats (bootstrap samples).
std::optional<SplitCandidate> best_split_presorted(const Dataset& d,
                                                   std::span<const std::size_t> rows,
                                                   std::span<const double> grad,
                                                   std::span<const double> hess,
                                                   const TreeGrowthParams& params,
                                                   std::span<const std::size_t> features = {});

}  // namespace creditboost
