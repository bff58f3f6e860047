#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "creditboost/data.hpp"
#include "creditboost/learners.hpp"

namespace creditboost {

enum class FusionStrategy { kAveraging, kVoting, kBlending, kStacking };

std::string_view to_string(FusionStrategy strategy);
FusionStrategy parse_fusion_strategy(std::string_view text);

struct FusionConfig {
  FusionStrategy strategy = FusionStrategy::kStacking;
  /// Stacking only.
  int n_folds = 5;
  /// Blending and voting: share of the training rows held out.
  double holdout_fraction = 0.2;
  LearnerSpec meta_learner = LearnerSpec::linear(1e-6);
  std::uint64_t seed = 0;

  void validate() const;
};

/// One fitted learner per feature subset, each trained on that subset's
/// columns only.
using BaseModels = std::map<Subset, FittedLearner>;

struct FusionModel {
  FusionStrategy strategy = FusionStrategy::kAveraging;
  BaseModels base_models;
  /// Voting weights in subset order; empty for other strategies.
  std::vector<double> weights;
  /// Blending and stacking.
  std::optional<FittedLearner> meta_model;
  /// Training-time schema; records which column feeds which base model.
  Schema schema;

  bool operator==(const FusionModel&) const = default;
};

enum class MetaProvenance { kOutOfFold, kHoldout, kTestTime };

/// Base-model predictions as a dataset with one column per subset (named by
/// the subset tag). Carries the true target when it is known.
struct MetaFeatures {
  Dataset data;
  MetaProvenance provenance = MetaProvenance::kTestTime;
};

/// Called with every dataset a learner is about to be fit on. Invoked from
/// the calling thread only.
using FitObserver = std::function<void(std::string_view stage, const Dataset& train)>;

BaseModels fit_base_models(const Dataset& train, const LearnerSpec& learner,
                           const FitObserver& observer = {});

/// Predictions of each base model on its subset of `d`'s columns.
MetaFeatures base_predictions(const BaseModels& models, const Dataset& d,
                              MetaProvenance provenance = MetaProvenance::kTestTime);

std::vector<double> fuse_averaging(const BaseModels& models, const Dataset& test);

/// Weights proportional to 1/MAE, normalized to sum to one. Models with zero
/// MAE split the whole weight between them.
std::vector<double> voting_weights_from_mae(std::span<const double> maes);
/// Inverse-MAE weights of `models` (in map order) on `validation`.
std::vector<double> fit_voting_weights(const BaseModels& models, const Dataset& validation);
std::vector<double> fuse_voting(const BaseModels& models, std::span<const double> weights,
                                const Dataset& test);

/// Bookkeeping from fit_stacking used to audit the out-of-fold construction.
struct StackingTrace {
  std::vector<int> fold_of_row;
  /// Training rows (indices into the stacking input) used for each fold's models.
  std::vector<std::vector<std::size_t>> fold_train_rows;
  MetaFeatures out_of_fold;
};

/// Deterministic fold labels: rows shuffled by `seed` and dealt round-robin.
std::vector<int> assign_folds(std::size_t n_rows, int n_folds, std::uint64_t seed);

FusionModel fit_averaging(const Dataset& train, const LearnerSpec& learner,
                          const FitObserver& observer = {});
FusionModel fit_voting(const Dataset& train, const FusionConfig& config,
                       const LearnerSpec& learner, const FitObserver& observer = {});
FusionModel fit_blending(const Dataset& train, const FusionConfig& config,
                         const LearnerSpec& learner, const FitObserver& observer = {},
                         MetaFeatures* holdout_features = nullptr);
FusionModel fit_stacking(const Dataset& train, const FusionConfig& config,
                         const LearnerSpec& learner, const FitObserver& observer = {},
                         StackingTrace* trace = nullptr);
/// Dispatches on config.strategy.
FusionModel fit_fusion(const Dataset& train, const FusionConfig& config,
                       const LearnerSpec& learner, const FitObserver& observer = {});

/// Throws SchemaError naming any subset column missing from `test`.
std::vector<double> predict_fusion(const FusionModel& model, const Dataset& test);

}  // namespace creditboost
