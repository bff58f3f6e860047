#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "creditboost/binning.hpp"
#include "creditboost/data.hpp"
#include "creditboost/split.hpp"
#include "creditboost/tree.hpp"

namespace creditboost {

enum class Objective { kL2Regression };

/// Gradient-boosting hyperparameters. `max_depth <= 0` means unbounded.
struct BoosterParams {
  int num_iterations = 100;
  double learning_rate = 0.1;
  int num_leaves = 31;
  int max_depth = -1;
  int min_data_in_leaf = 20;
  int max_bin = kDefaultMaxBin;
  double feature_fraction = 1.0;
  double bagging_fraction = 1.0;
  int bagging_freq = 0;
  double lambda_l2 = 0.0;
  double min_gain_to_split = 0.0;
  Objective objective = Objective::kL2Regression;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument naming the first violated constraint.
  void validate() const;
  TreeGrowthParams tree_params() const;

  bool operator==(const BoosterParams&) const = default;
};

/// An additive tree ensemble: prediction = base_score + sum of leaf weights.
struct BoostedModel {
  double base_score = 0.0;
  std::vector<Tree> trees;
  BoosterParams params;
  BinMapper mapper;
  std::vector<std::string> feature_names;

  bool operator==(const BoostedModel&) const = default;
};

/// Squared-error gradients: grad = prediction - target, hess = 1.
std::pair<std::vector<double>, std::vector<double>> compute_gradients(
    std::span<const double> target, std::span<const double> prediction);

struct BoostingTrace {
  /// Training MSE after each iteration, over all training rows.
  std::vector<double> train_mse;
  GrowthStats growth;
  /// Rows used by each iteration's tree (bagging), only when record_rows.
  bool record_rows = false;
  std::vector<std::vector<std::size_t>> rows_per_iteration;
};

/// Fits `params.num_iterations` leaf-wise trees on the squared-error
/// gradients. Deterministic for a fixed params.seed, independent of the
/// number of worker threads.
BoostedModel fit_gbdt(const Dataset& d, const BoosterParams& params,
                      BoostingTrace* trace = nullptr);

/// Bins `d` with the model's mapper and sums routed leaf weights. Throws
/// SchemaError if `d`'s columns differ from the fit-time columns.
std::vector<double> predict(const BoostedModel& model, const Dataset& d);

}  // namespace creditboost
