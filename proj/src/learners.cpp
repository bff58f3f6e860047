#include "creditboost/learners.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <ranges>

#include "creditboost/errors.hpp"
#include "creditboost/split.hpp"
#include "random_util.hpp"
#include "text_util.hpp"

namespace creditboost {

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kLinearRegression: return "linear";
    case LearnerKind::kDecisionTree: return "cart";
    case LearnerKind::kRandomForest: return "forest";
    case LearnerKind::kGbdt: return "gbdt";
  }
  return "linear";
}

LearnerKind parse_learner_kind(std::string_view text) {
  for (auto k : {LearnerKind::kLinearRegression, LearnerKind::kDecisionTree,
                 LearnerKind::kRandomForest, LearnerKind::kGbdt}) {
    if (to_string(k) == text) return k;
  }
  if (text == "linear_regression") return LearnerKind::kLinearRegression;
  if (text == "decision_tree") return LearnerKind::kDecisionTree;
  if (text == "random_forest") return LearnerKind::kRandomForest;
  throw ParseError("unknown learner kind '" + std::string(text) + "'");
}

std::string_view display_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kLinearRegression: return "Linear Regression (LR)";
    case LearnerKind::kDecisionTree: return "Decision Tree (DT)";
    case LearnerKind::kRandomForest: return "Random Forest (RF)";
    case LearnerKind::kGbdt: return "GBDT";
  }
  return "";
}

LearnerKind LearnerSpec::kind() const {
  return static_cast<LearnerKind>(params.index());
}

void LearnerSpec::validate() const {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          if (!(p.ridge_lambda >= 0.0)) throw InvalidArgument("ridge_lambda must be >= 0");
        } else if constexpr (std::is_same_v<P, CartParams>) {
          if (p.min_data_in_leaf < 1) throw InvalidArgument("min_data_in_leaf must be >= 1");
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          if (p.n_trees < 1) throw InvalidArgument("n_trees must be >= 1");
          if (p.min_data_in_leaf < 1) throw InvalidArgument("min_data_in_leaf must be >= 1");
          if (!(p.feature_fraction > 0.0 && p.feature_fraction <= 1.0)) {
            throw InvalidArgument("feature_fraction must lie in (0, 1]");
          }
        } else {
          p.validate();
        }
      },
      params);
}

LearnerSpec LearnerSpec::linear(double ridge_lambda) {
  return LearnerSpec{LinearParams{ridge_lambda}, 0};
}
LearnerSpec LearnerSpec::cart(CartParams p) { return LearnerSpec{p, 0}; }
LearnerSpec LearnerSpec::forest(ForestParams p, std::uint64_t seed) {
  return LearnerSpec{p, seed};
}
LearnerSpec LearnerSpec::gbdt(BoosterParams p, std::uint64_t seed) {
  return LearnerSpec{p, seed};
}

// --- linear regression --------------------------------------------------------

LinearModel LinearModel::from_coefficients(std::vector<double> coefficients, double intercept) {
  LinearModel m;
  m.means.assign(coefficients.size(), 0.0);
  m.scales.assign(coefficients.size(), 1.0);
  m.coefficients = std::move(coefficients);
  m.intercept = intercept;
  return m;
}

double LinearModel::predict_row(std::span<const double> x) const {
  double y = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    if (scales[j] > 0.0) y += coefficients[j] * ((x[j] - means[j]) / scales[j]);
  }
  return y;
}

LinearModel fit_linear_model(const Dataset& d, double ridge_lambda) {
  if (d.n_rows == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (!(ridge_lambda >= 0.0)) throw InvalidArgument("ridge_lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(d.n_rows);
  const auto m = static_cast<Eigen::Index>(d.n_cols());

  LinearModel model;
  model.means.resize(d.n_cols());
  model.scales.resize(d.n_cols());
  Eigen::MatrixXd z(n, m);
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    const auto col = d.column(j);
    const double mean = detail::stable_mean(col);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(d.n_rows));
    model.means[j] = mean;
    model.scales[j] = sd > 0.0 ? sd : 0.0;
    for (std::size_t i = 0; i < d.n_rows; ++i) {
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          sd > 0.0 ? (col[i] - mean) / sd : 0.0;
    }
  }
  model.intercept = detail::stable_mean(d.target);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < d.n_rows; ++i) {
    y(static_cast<Eigen::Index>(i)) = d.target[i] - model.intercept;
  }

  // Normal equations (Z'Z + l I) b = Z'y on centered data; the intercept is
  // the target mean and carries no penalty.
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += ridge_lambda;
  const Eigen::VectorXd rhs = z.transpose() * y;
  Eigen::VectorXd beta;
  if (m > 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    beta = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
      beta = gram.completeOrthogonalDecomposition().solve(rhs);
    }
  }
  model.coefficients.assign(beta.data(), beta.data() + beta.size());
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (model.scales[j] == 0.0) model.coefficients[j] = 0.0;
  }
  return model;
}

// --- CART ---------------------------------------------------------------------

namespace {

class CartBuilder {
 public:
  CartBuilder(const Dataset& d, const CartParams& params, std::size_t features_per_split,
              std::uint64_t seed)
      : d_(d),
        params_(params),
        features_per_split_(std::min(features_per_split, d.n_cols())),
        rng_(seed),
        centered_(d.n_rows, 0.0),
        ones_(d.n_rows, 1.0) {
    split_params_.num_leaves = 2;
    split_params_.min_data_in_leaf = params.min_data_in_leaf;
    split_params_.lambda_l2 = 0.0;
    split_params_.min_gain_to_split = 0.0;
  }

  Tree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    nodes_.emplace_back();
    grow(0, std::move(rows), 0);
    return Tree(std::move(nodes_));
  }

 private:
  void grow(std::size_t node, std::vector<std::size_t> rows, int depth) {
    const double mean = detail::stable_mean(
        std::views::transform(rows, [&](std::size_t r) { return d_.target[r]; }));
    nodes_[node].count = rows.size();
    nodes_[node].weight = mean;

    const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
    if (!depth_ok || rows.size() < 2 * static_cast<std::size_t>(params_.min_data_in_leaf)) {
      return;
    }
    // Gains are invariant to shifting a node's targets, so center them for
    // numerical headroom.
    for (const auto r : rows) centered_[r] = d_.target[r] - mean;

    std::vector<std::size_t> features;
    if (features_per_split_ < d_.n_cols()) {
      features = detail::sample_without_replacement(d_.n_cols(), features_per_split_, rng_);
    }
    const auto split =
        best_split_presorted(d_, rows, centered_, ones_, split_params_, features);
    if (!split) return;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    left.reserve(split->left_count);
    right.reserve(split->right_count);
    for (const auto r : rows) {
      (d_.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const std::size_t l = nodes_.size();
    nodes_.emplace_back();
    nodes_.emplace_back();
    auto& n = nodes_[node];
    n.feature = static_cast<int>(split->feature);
    n.threshold = split->threshold;
    n.gain = split->gain;
    n.left = static_cast<int>(l);
    n.right = static_cast<int>(l + 1);
    n.weight = 0.0;
    grow(l, std::move(left), depth + 1);
    grow(l + 1, std::move(right), depth + 1);
  }

  const Dataset& d_;
  CartParams params_;
  TreeGrowthParams split_params_;
  std::size_t features_per_split_;
  std::mt19937_64 rng_;
  std::vector<double> centered_;
  std::vector<double> ones_;
  std::vector<TreeNode> nodes_;
};

void check_trainable(const Dataset& d) {
  if (d.n_rows == 0) throw InvalidArgument("cannot fit on an empty dataset");
  if (!d.has_target()) throw InvalidArgument("cannot fit without a target column");
  if (!d.all_finite()) throw InvalidArgument("dataset contains NaN or infinite values");
}

}  // namespace

Tree fit_cart_tree(const Dataset& d, std::span<const std::size_t> rows, const CartParams& params,
                   std::size_t features_per_split, std::uint64_t seed) {
  if (rows.empty()) throw InvalidArgument("cannot grow a tree on zero rows");
  CartBuilder builder(d, params, features_per_split, seed);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

FittedLearner fit_linear(const Dataset& d, double ridge_lambda) {
  return fit_learner(LearnerSpec::linear(ridge_lambda), d);
}

FittedLearner fit_cart(const Dataset& d, int max_depth, int min_data_in_leaf) {
  return fit_learner(LearnerSpec::cart(CartParams{max_depth, min_data_in_leaf}), d);
}

FittedLearner fit_random_forest(const Dataset& d, const ForestParams& params,
                                std::uint64_t seed) {
  return fit_learner(LearnerSpec::forest(params, seed), d);
}

namespace {

ForestModel fit_forest_model(const Dataset& d, const ForestParams& p, std::uint64_t seed) {
  const std::size_t n = d.n_rows;
  const std::size_t per_split = detail::fraction_count(p.feature_fraction, d.n_cols());
  const CartParams cart{p.max_depth, p.min_data_in_leaf};
  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(p.n_trees));
  model.tree_seeds.resize(static_cast<std::size_t>(p.n_trees));
  for (std::size_t t = 0; t < model.tree_seeds.size(); ++t) {
    model.tree_seeds[t] = detail::mix_seed(seed, 3, t);
  }
  // Trees are independent and each writes its own slot.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t tt = 0; tt < static_cast<std::ptrdiff_t>(p.n_trees); ++tt) {
    const auto t = static_cast<std::size_t>(tt);
    std::mt19937_64 rng(model.tree_seeds[t]);
    std::vector<std::size_t> rows(n);
    if (p.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
      std::sort(rows.begin(), rows.end());
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    model.trees[t] = fit_cart_tree(d, rows, cart, per_split, rng());
  }
  return model;
}

}  // namespace

FittedLearner fit_learner(const LearnerSpec& spec, const Dataset& d) {
  spec.validate();
  check_trainable(d);
  FittedLearner out;
  out.spec = spec;
  out.feature_names = d.schema.names();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          out.model = fit_linear_model(d, p.ridge_lambda);
        } else if constexpr (std::is_same_v<P, CartParams>) {
          std::vector<std::size_t> rows(d.n_rows);
          std::iota(rows.begin(), rows.end(), std::size_t{0});
          out.model = CartModel{fit_cart_tree(d, rows, p, d.n_cols(), spec.seed)};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          out.model = fit_forest_model(d, p, spec.seed);
        } else {
          BoosterParams bp = p;
          bp.seed = spec.seed;
          out.spec.params = bp;
          out.model = fit_gbdt(d, bp);
        }
      },
      spec.params);
  return out;
}

std::vector<double> predict(const FittedLearner& learner, const Dataset& d) {
  require_columns(learner.feature_names, d.schema);
  std::vector<double> out(d.n_rows);
  if (d.n_rows == 0) return out;
  std::visit(
      [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, BoostedModel>) {
          out = predict(model, d);
        } else {
          std::vector<double> row(d.n_cols());
          for (std::size_t i = 0; i < d.n_rows; ++i) {
            if constexpr (std::is_same_v<M, LinearModel>) {
              for (std::size_t j = 0; j < d.n_cols(); ++j) row[j] = d.at(i, j);
              out[i] = model.predict_row(row);
            } else if constexpr (std::is_same_v<M, CartModel>) {
              out[i] = model.tree.predict_raw(d, i);
            } else {
              out[i] = detail::stable_mean(std::views::transform(
                  model.trees, [&](const Tree& tree) { return tree.predict_raw(d, i); }));
            }
          }
        }
      },
      learner.model);
  return out;
}

}  // namespace creditboost
