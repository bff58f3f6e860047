#include "creditboost/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "creditboost/errors.hpp"
#include "creditboost/metrics.hpp"

namespace creditboost {

std::string_view to_string(FusionStrategy strategy) {
  switch (strategy) {
    case FusionStrategy::kAveraging: return "averaging";
    case FusionStrategy::kVoting: return "voting";
    case FusionStrategy::kBlending: return "blending";
    case FusionStrategy::kStacking: return "stacking";
  }
  return "averaging";
}

FusionStrategy parse_fusion_strategy(std::string_view text) {
  for (auto s : {FusionStrategy::kAveraging, FusionStrategy::kVoting, FusionStrategy::kBlending,
                 FusionStrategy::kStacking}) {
    if (to_string(s) == text) return s;
  }
  throw ParseError("unknown fusion strategy '" + std::string(text) + "'");
}

void FusionConfig::validate() const {
  switch (strategy) {
    case FusionStrategy::kStacking:
      if (n_folds < 2) throw InvalidArgument("stacking needs n_folds >= 2");
      meta_learner.validate();
      break;
    case FusionStrategy::kBlending:
      meta_learner.validate();
      [[fallthrough]];
    case FusionStrategy::kVoting:
      if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw InvalidArgument("holdout_fraction must lie in (0, 1)");
      }
      break;
    case FusionStrategy::kAveraging:
      break;
  }
}

namespace {

void notify(const FitObserver& observer, std::string_view stage, const Dataset& d) {
  if (observer) observer(stage, d);
}

/// Weighted mean computed incrementally so that equal inputs come back
/// unchanged and uniform weights match a plain running mean.
double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  double mean = 0.0;
  double seen = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (weights[b] <= 0.0) continue;
    seen += weights[b];
    mean += (weights[b] / seen) * (values[b] - mean);
  }
  return mean;
}

std::vector<double> combine_weighted(const MetaFeatures& meta, std::span<const double> weights) {
  const Dataset& m = meta.data;
  if (weights.size() != m.n_cols()) {
    throw InvalidArgument("got " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(m.n_cols()) + " base models");
  }
  std::vector<double> out(m.n_rows);
  std::vector<double> row(m.n_cols());
  for (std::size_t i = 0; i < m.n_rows; ++i) {
    for (std::size_t b = 0; b < m.n_cols(); ++b) row[b] = m.at(i, b);
    out[i] = weighted_mean(row, weights);
  }
  return out;
}

void require_all_subsets(const BaseModels& models) {
  for (Subset s : kAllSubsets) {
    if (!models.contains(s)) {
      throw InvalidArgument("fusion needs a base model for subset '" +
                            std::string(to_string(s)) + "'");
    }
  }
}

void check_fusion_input(const Dataset& train) {
  if (!train.has_target()) throw InvalidArgument("fusion training data has no target");
  for (Subset s : kAllSubsets) {
    if (subset_columns(train.schema, s).empty()) {
      throw SchemaError("training data has no columns in subset '" +
                        std::string(to_string(s)) + "'");
    }
  }
}

}  // namespace

BaseModels fit_base_models(const Dataset& train, const LearnerSpec& learner,
                           const FitObserver& observer) {
  auto parts = split_subsets(train);
  for (const auto& [subset, part] : parts) notify(observer, to_string(subset), part);
  std::vector<std::pair<Subset, const Dataset*>> jobs;
  for (const auto& [subset, part] : parts) {
    if (part.n_cols() > 0) jobs.emplace_back(subset, &part);
  }
  std::vector<FittedLearner> fitted(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(jobs.size()); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    fitted[kk] = fit_learner(learner, *jobs[kk].second);
  }
  BaseModels out;
  for (std::size_t k = 0; k < jobs.size(); ++k) out.emplace(jobs[k].first, std::move(fitted[k]));
  return out;
}

MetaFeatures base_predictions(const BaseModels& models, const Dataset& d,
                              MetaProvenance provenance) {
  std::vector<std::string> missing;
  for (const auto& [subset, learner] : models) {
    for (const auto& name : learner.feature_names) {
      if (!d.schema.index_of(name)) missing.push_back(name);
    }
  }
  if (!missing.empty()) {
    std::string msg = "input is missing columns required by the base models:";
    for (const auto& name : missing) msg += " " + name;
    throw SchemaError(msg);
  }

  std::vector<std::string> names;
  for (const auto& entry : models) names.emplace_back(to_string(entry.first));
  MetaFeatures meta;
  meta.provenance = provenance;
  meta.data.schema = numeric_schema(names, d.schema.target_name());
  meta.data.n_rows = d.n_rows;
  meta.data.values.resize(d.n_rows * names.size());
  meta.data.target = d.target;
  meta.data.ids = d.ids;
  std::size_t b = 0;
  for (const auto& [subset, learner] : models) {
    const auto pred = predict(learner, d.select_columns(std::span<const std::string>(
                                           learner.feature_names)));
    std::copy(pred.begin(), pred.end(), meta.data.column(b).begin());
    ++b;
  }
  return meta;
}

std::vector<double> fuse_averaging(const BaseModels& models, const Dataset& test) {
  const std::vector<double> uniform(models.size(), 1.0 / static_cast<double>(models.size()));
  return fuse_voting(models, uniform, test);
}

std::vector<double> voting_weights_from_mae(std::span<const double> maes) {
  if (maes.empty()) throw InvalidArgument("no base models to weight");
  std::vector<double> w(maes.size(), 0.0);
  const auto perfect = static_cast<std::size_t>(
      std::count(maes.begin(), maes.end(), 0.0));
  if (perfect > 0) {
    for (std::size_t b = 0; b < maes.size(); ++b) {
      if (maes[b] == 0.0) w[b] = 1.0 / static_cast<double>(perfect);
    }
    return w;
  }
  double total = 0.0;
  for (std::size_t b = 0; b < maes.size(); ++b) {
    if (!(maes[b] > 0.0) || !std::isfinite(maes[b])) {
      throw InvalidArgument("validation MAE must be finite and non-negative");
    }
    w[b] = 1.0 / maes[b];
    total += w[b];
  }
  for (auto& x : w) x /= total;
  return w;
}

std::vector<double> fit_voting_weights(const BaseModels& models, const Dataset& validation) {
  if (!validation.has_target()) throw InvalidArgument("validation data has no target");
  const MetaFeatures meta = base_predictions(models, validation, MetaProvenance::kHoldout);
  std::vector<double> maes;
  for (std::size_t b = 0; b < meta.data.n_cols(); ++b) {
    maes.push_back(evaluate(validation.target, meta.data.column(b)).mae);
  }
  return voting_weights_from_mae(maes);
}

std::vector<double> fuse_voting(const BaseModels& models, std::span<const double> weights,
                                const Dataset& test) {
  return combine_weighted(base_predictions(models, test), weights);
}

std::vector<int> assign_folds(std::size_t n_rows, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw InvalidArgument("n_folds must be >= 2");
  if (static_cast<std::size_t>(n_folds) > n_rows) {
    throw InvalidArgument("n_folds (" + std::to_string(n_folds) + ") exceeds the " +
                          std::to_string(n_rows) + " training rows; a fold would be empty");
  }
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(n_rows);
  for (std::size_t k = 0; k < n_rows; ++k) {
    fold[order[k]] = static_cast<int>(k % static_cast<std::size_t>(n_folds));
  }
  return fold;
}

FusionModel fit_averaging(const Dataset& train, const LearnerSpec& learner,
                          const FitObserver& observer) {
  check_fusion_input(train);
  FusionModel model;
  model.strategy = FusionStrategy::kAveraging;
  model.schema = train.schema;
  model.base_models = fit_base_models(train, learner, observer);
  return model;
}

namespace {

struct HoldoutSplit {
  Dataset fit_part;
  Dataset holdout;
};

HoldoutSplit split_holdout(const Dataset& train, const FusionConfig& config) {
  const double holdout_rows = static_cast<double>(train.n_rows) * config.holdout_fraction;
  if (holdout_rows < 10.0) {
    throw InvalidArgument("holdout would hold " + std::to_string(holdout_rows) +
                          " rows; at least 10 are required");
  }
  auto [fit_part, holdout] = train_test_split(train, config.holdout_fraction, config.seed);
  return {std::move(fit_part), std::move(holdout)};
}

FittedLearner fit_meta(const MetaFeatures& meta, const FusionConfig& config,
                       const FitObserver& observer) {
  LearnerSpec spec = config.meta_learner;
  spec.seed = config.seed;
  notify(observer, "meta", meta.data);
  return fit_learner(spec, meta.data);
}

}  // namespace

FusionModel fit_voting(const Dataset& train, const FusionConfig& config,
                       const LearnerSpec& learner, const FitObserver& observer) {
  config.validate();
  check_fusion_input(train);
  auto split = split_holdout(train, config);
  FusionModel model;
  model.strategy = FusionStrategy::kVoting;
  model.schema = train.schema;
  model.base_models = fit_base_models(split.fit_part, learner, observer);
  model.weights = fit_voting_weights(model.base_models, split.holdout);
  return model;
}

FusionModel fit_blending(const Dataset& train, const FusionConfig& config,
                         const LearnerSpec& learner, const FitObserver& observer,
                         MetaFeatures* holdout_features) {
  config.validate();
  check_fusion_input(train);
  auto split = split_holdout(train, config);
  FusionModel model;
  model.strategy = FusionStrategy::kBlending;
  model.schema = train.schema;
  model.base_models = fit_base_models(split.fit_part, learner, observer);
  MetaFeatures meta = base_predictions(model.base_models, split.holdout, MetaProvenance::kHoldout);
  model.meta_model = fit_meta(meta, config, observer);
  if (holdout_features) *holdout_features = std::move(meta);
  return model;
}

FusionModel fit_stacking(const Dataset& train, const FusionConfig& config,
                         const LearnerSpec& learner, const FitObserver& observer,
                         StackingTrace* trace) {
  config.validate();
  check_fusion_input(train);
  const std::size_t n = train.n_rows;
  const auto k = static_cast<std::size_t>(config.n_folds);
  const std::vector<int> fold = assign_folds(n, config.n_folds, config.seed);

  std::vector<std::vector<std::size_t>> fit_rows(k);
  std::vector<std::vector<std::size_t>> held_rows(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = static_cast<std::size_t>(fold[i]);
    held_rows[f].push_back(i);
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) fit_rows[g].push_back(i);
    }
  }

  // Out-of-fold predictions: row i is scored only by models that excluded
  // fold[i] from training.
  std::vector<std::string> names;
  for (Subset s : kAllSubsets) names.emplace_back(to_string(s));
  MetaFeatures oof;
  oof.provenance = MetaProvenance::kOutOfFold;
  oof.data.schema = numeric_schema(names, train.schema.target_name());
  oof.data.n_rows = n;
  oof.data.values.assign(n * names.size(), std::numeric_limits<double>::quiet_NaN());
  oof.data.target = train.target;
  oof.data.ids = train.ids;

  std::vector<Dataset> fold_train(k);
  std::vector<Dataset> fold_held(k);
  for (std::size_t f = 0; f < k; ++f) {
    fold_train[f] = train.select_rows(fit_rows[f]);
    fold_held[f] = train.select_rows(held_rows[f]);
  }
  std::vector<BaseModels> fold_models(k);
  for (std::size_t f = 0; f < k; ++f) {
    fold_models[f] = fit_base_models(fold_train[f], learner, observer);
    const MetaFeatures part =
        base_predictions(fold_models[f], fold_held[f], MetaProvenance::kOutOfFold);
    for (std::size_t b = 0; b < names.size(); ++b) {
      const auto src = part.data.column(b);
      auto dst = oof.data.column(b);
      for (std::size_t r = 0; r < held_rows[f].size(); ++r) dst[held_rows[f][r]] = src[r];
    }
  }
  if (!oof.data.all_finite()) {
    throw ConsistencyError("out-of-fold matrix has rows no fold model scored");
  }

  FusionModel model;
  model.strategy = FusionStrategy::kStacking;
  model.schema = train.schema;
  model.meta_model = fit_meta(oof, config, observer);
  model.base_models = fit_base_models(train, learner, observer);

  if (trace) {
    trace->fold_of_row = fold;
    trace->fold_train_rows = std::move(fit_rows);
    trace->out_of_fold = std::move(oof);
  }
  return model;
}

FusionModel fit_fusion(const Dataset& train, const FusionConfig& config,
                       const LearnerSpec& learner, const FitObserver& observer) {
  switch (config.strategy) {
    case FusionStrategy::kAveraging: return fit_averaging(train, learner, observer);
    case FusionStrategy::kVoting: return fit_voting(train, config, learner, observer);
    case FusionStrategy::kBlending: return fit_blending(train, config, learner, observer);
    case FusionStrategy::kStacking: return fit_stacking(train, config, learner, observer);
  }
  throw InvalidArgument("unknown fusion strategy");
}

std::vector<double> predict_fusion(const FusionModel& model, const Dataset& test) {
  require_all_subsets(model.base_models);
  MetaFeatures meta = base_predictions(model.base_models, test);
  switch (model.strategy) {
    case FusionStrategy::kAveraging: {
      const std::vector<double> uniform(model.base_models.size(),
                                        1.0 / static_cast<double>(model.base_models.size()));
      return combine_weighted(meta, uniform);
    }
    case FusionStrategy::kVoting:
      return combine_weighted(meta, model.weights);
    case FusionStrategy::kBlending:
    case FusionStrategy::kStacking:
      if (!model.meta_model) throw InvalidArgument("fusion model has no meta-learner");
      return predict(*model.meta_model, meta.data);
  }
  throw InvalidArgument("unknown fusion strategy");
}

}  // namespace creditboost
