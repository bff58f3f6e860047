#include "creditboost/booster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "creditboost/errors.hpp"
#include "random_util.hpp"
#include "text_util.hpp"

namespace creditboost {

namespace {

}  // namespace

void BoosterParams::validate() const {
  if (num_iterations < 0) throw InvalidArgument("num_iterations must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (num_leaves < 2) throw InvalidArgument("num_leaves must be >= 2");
  if (min_data_in_leaf < 1) throw InvalidArgument("min_data_in_leaf must be >= 1");
  if (max_bin < 2 || max_bin > 65536) throw InvalidArgument("max_bin must lie in [2, 65536]");
  if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) {
    throw InvalidArgument("feature_fraction must lie in (0, 1]");
  }
  if (!(bagging_fraction > 0.0 && bagging_fraction <= 1.0)) {
    throw InvalidArgument("bagging_fraction must lie in (0, 1]");
  }
  if (bagging_freq < 0) throw InvalidArgument("bagging_freq must be >= 0");
  if (!(lambda_l2 >= 0.0)) throw InvalidArgument("lambda_l2 must be >= 0");
  if (!(min_gain_to_split >= 0.0)) throw InvalidArgument("min_gain_to_split must be >= 0");
}

TreeGrowthParams BoosterParams::tree_params() const {
  TreeGrowthParams t;
  t.num_leaves = num_leaves;
  t.max_depth = max_depth;
  t.min_data_in_leaf = min_data_in_leaf;
  t.lambda_l2 = lambda_l2;
  t.min_gain_to_split = min_gain_to_split;
  t.learning_rate = learning_rate;
  return t;
}

std::pair<std::vector<double>, std::vector<double>> compute_gradients(
    std::span<const double> target, std::span<const double> prediction) {
  if (target.size() != prediction.size()) {
    throw InvalidArgument("target and prediction lengths differ");
  }
  std::vector<double> grad(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) grad[i] = prediction[i] - target[i];
  return {std::move(grad), std::vector<double>(target.size(), 1.0)};
}

BoostedModel fit_gbdt(const Dataset& d, const BoosterParams& params, BoostingTrace* trace) {
  params.validate();
  if (d.n_rows == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (!d.has_target()) throw InvalidArgument("cannot fit without a target column");
  if (!d.all_finite()) throw InvalidArgument("dataset contains NaN or infinite values");

  BoostedModel model;
  model.params = params;
  model.feature_names = d.schema.names();
  model.mapper = fit_bins(d, params.max_bin);
  model.base_score = detail::stable_mean(d.target);

  const BinnedDataset bd = apply_bins(d, model.mapper);
  const std::size_t n = d.n_rows;
  const std::size_t m = d.n_cols();
  const TreeGrowthParams tree_params = params.tree_params();

  std::vector<double> prediction(n, model.base_score);
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  std::vector<std::size_t> bag = all_rows;
  const bool bagging = params.bagging_freq > 0 && params.bagging_fraction < 1.0;
  const std::size_t bag_size = detail::fraction_count(params.bagging_fraction, n);
  const std::size_t feature_count = detail::fraction_count(params.feature_fraction, m);

  GrowthStats growth;
  model.trees.reserve(static_cast<std::size_t>(params.num_iterations));
  for (int it = 0; it < params.num_iterations; ++it) {
    const auto iter = static_cast<std::uint64_t>(it);
    const auto [grad, hess] = compute_gradients(d.target, prediction);

    if (bagging && it % params.bagging_freq == 0) {
      std::mt19937_64 rng(detail::mix_seed(params.seed, 1, iter));
      bag = detail::sample_without_replacement(n, bag_size, rng);
    }
    std::vector<std::size_t> features;
    if (feature_count < m) {
      std::mt19937_64 rng(detail::mix_seed(params.seed, 2, iter));
      features = detail::sample_without_replacement(m, feature_count, rng);
    }

    const auto& rows = bagging ? bag : all_rows;
    Tree tree = grow_tree_leafwise(bd, rows, grad, hess, tree_params, features,
                                   trace ? &growth : nullptr);
    for (std::size_t i = 0; i < n; ++i) prediction[i] += tree.predict_binned(bd, i);
    model.trees.push_back(std::move(tree));

    if (trace) {
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = prediction[i] - d.target[i];
        sse += e * e;
      }
      trace->train_mse.push_back(sse / static_cast<double>(n));
      if (trace->record_rows) trace->rows_per_iteration.push_back(rows);
    }
  }
  if (trace) trace->growth = growth;
  return model;
}

std::vector<double> predict(const BoostedModel& model, const Dataset& d) {
  require_columns(model.feature_names, d.schema);
  const BinnedDataset bd = apply_bins(d, model.mapper);
  std::vector<double> out(d.n_rows, model.base_score);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(d.n_rows); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double acc = model.base_score;
    for (const auto& tree : model.trees) acc += tree.predict_binned(bd, i);
    out[i] = acc;
  }
  return out;
}

}  // namespace creditboost
