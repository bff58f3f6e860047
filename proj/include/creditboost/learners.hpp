#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "creditboost/booster.hpp"
#include "creditboost/data.hpp"
#include "creditboost/tree.hpp"

namespace creditboost {

enum class LearnerKind { kLinearRegression, kDecisionTree, kRandomForest, kGbdt };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view text);
/// Report label, e.g. "Random Forest (RF)".
std::string_view display_name(LearnerKind kind);

struct LinearParams {
  double ridge_lambda = 1e-6;
  bool operator==(const LinearParams&) const = default;
};

struct CartParams {
  /// <= 0 means unbounded.
  int max_depth = -1;
  int min_data_in_leaf = 1;
  bool operator==(const CartParams&) const = default;
};

struct ForestParams {
  int n_trees = 100;
  int max_depth = -1;
  int min_data_in_leaf = 1;
  /// Share of features considered at each split.
  double feature_fraction = 1.0 / 3.0;
  bool bootstrap = true;
  bool operator==(const ForestParams&) const = default;
};

using LearnerParams = std::variant<LinearParams, CartParams, ForestParams, BoosterParams>;

/// What to fit: the learner family, its hyperparameters and a seed. The seed
/// overrides BoosterParams::seed for gbdt.
struct LearnerSpec {
  LearnerParams params = LinearParams{};
  std::uint64_t seed = 0;

  LearnerKind kind() const;
  void validate() const;

  static LearnerSpec linear(double ridge_lambda = 1e-6);
  static LearnerSpec cart(CartParams p = {});
  static LearnerSpec forest(ForestParams p = {}, std::uint64_t seed = 0);
  static LearnerSpec gbdt(BoosterParams p = {}, std::uint64_t seed = 0);

  bool operator==(const LearnerSpec&) const = default;
};

/// Ridge regression on standardized features with an unpenalized intercept.
struct LinearModel {
  std::vector<double> means;
  /// 0 marks a constant training column; its standardized value is taken as 0.
  std::vector<double> scales;
  std::vector<double> coefficients;
  double intercept = 0.0;

  /// A model with the given raw-scale coefficients (means 0, scales 1).
  static LinearModel from_coefficients(std::vector<double> coefficients, double intercept);
  double predict_row(std::span<const double> x) const;

  bool operator==(const LinearModel&) const = default;
};

struct CartModel {
  Tree tree;
  bool operator==(const CartModel&) const = default;
};

struct ForestModel {
  std::vector<Tree> trees;
  /// Seed that generated each tree's bootstrap sample and feature draws.
  std::vector<std::uint64_t> tree_seeds;
  bool operator==(const ForestModel&) const = default;
};

using LearnerModel = std::variant<LinearModel, CartModel, ForestModel, BoostedModel>;

struct FittedLearner {
  LearnerSpec spec;
  std::vector<std::string> feature_names;
  LearnerModel model;

  LearnerKind kind() const { return spec.kind(); }
  bool operator==(const FittedLearner&) const = default;
};

LinearModel fit_linear_model(const Dataset& d, double ridge_lambda);
/// Depth-first CART on raw values with the exact split search; leaves hold
/// the mean target. `features_per_split` < n_cols draws a fresh feature subset
/// at every node from `seed` (random-forest mode).
Tree fit_cart_tree(const Dataset& d, std::span<const std::size_t> rows, const CartParams& params,
                   std::size_t features_per_split, std::uint64_t seed);

FittedLearner fit_linear(const Dataset& d, double ridge_lambda = 1e-6);
FittedLearner fit_cart(const Dataset& d, int max_depth, int min_data_in_leaf);
FittedLearner fit_random_forest(const Dataset& d, const ForestParams& params, std::uint64_t seed);

/// Dispatches on spec.kind().
FittedLearner fit_learner(const LearnerSpec& spec, const Dataset& d);

/// Throws SchemaError unless `d` has exactly the fit-time columns in order.
std::vector<double> predict(const FittedLearner& learner, const Dataset& d);

}  // namespace creditboost
