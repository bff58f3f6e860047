// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except to
// read its outputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "creditboost/data.hpp"
#include "creditboost/tree.hpp"

namespace oracle {

struct Metrics {
  double mae, mape, mse, rmse, r2;
};

/// Two-pass, long-double recomputation of the five regression metrics.
inline Metrics metrics(std::span<const double> y, std::span<const double> p) {
  const std::size_t n = y.size();
  long double abs_sum = 0, sq_sum = 0, pct_sum = 0, y_sum = 0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double e = static_cast<long double>(y[i]) - p[i];
    abs_sum += std::fabs(e);
    sq_sum += e * e;
    y_sum += y[i];
    if (std::fabs(y[i]) > 1e-8) {
      pct_sum += std::fabs(e) / std::fabs(static_cast<long double>(y[i]));
      ++pct_n;
    }
  }
  const long double mean = y_sum / n;
  long double tss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = y[i] - mean;
    tss += d * d;
  }
  Metrics m{};
  m.mae = static_cast<double>(abs_sum / n);
  m.mse = static_cast<double>(sq_sum / n);
  m.rmse = static_cast<double>(std::sqrt(sq_sum / n));
  m.mape = pct_n ? static_cast<double>(pct_sum / pct_n) : std::numeric_limits<double>::quiet_NaN();
  if (tss > 0) {
    m.r2 = static_cast<double>(1.0L - sq_sum / tss);
  } else {
    m.r2 = sq_sum == 0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

inline bool close_rel(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

/// Random regression data with few distinct values per column, for
/// comparing histogram trees against exact trees.
inline creditboost::Dataset random_tree_dataset(std::mt19937_64& rng, std::size_t n_rows,
                                                std::size_t n_cols, int max_distinct) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < n_cols; ++j) names.push_back("x" + std::to_string(j));
  creditboost::Dataset d;
  d.schema = creditboost::numeric_schema(names);
  d.n_rows = n_rows;
  d.values.resize(n_rows * n_cols);
  for (std::size_t j = 0; j < n_cols; ++j) {
    const int distinct = std::uniform_int_distribution<int>(1, max_distinct)(rng);
    const double scale = std::uniform_real_distribution<double>(0.1, 100.0)(rng);
    std::uniform_int_distribution<int> level(0, distinct - 1);
    for (std::size_t i = 0; i < n_rows; ++i) d.column(j)[i] = scale * level(rng);
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  d.target.resize(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    d.target[i] = 3.0 * d.at(i, 0) / (1.0 + d.at(i, 0)) + noise(rng);
    if (n_cols > 1 && d.at(i, 1) > d.at(0, 1)) d.target[i] += 2.0;
  }
  for (std::size_t i = 0; i < n_rows; ++i) d.ids.push_back(std::to_string(i));
  return d;
}

/// Leaf index reached by a row, following raw-value thresholds.
inline int leaf_of(const creditboost::Tree& t, const creditboost::Dataset& d, std::size_t row) {
  int k = 0;
  while (!t.nodes()[static_cast<std::size_t>(k)].is_leaf()) {
    const auto& n = t.nodes()[static_cast<std::size_t>(k)];
    k = d.at(row, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
  }
  return k;
}

/// Node-for-node comparison: same split features, same child layout, same
/// node counts, every training row routed to the same leaf, and leaf weights
/// within `tol`. Thresholds may differ when both sit in the same gap
/// between observed values.
inline bool same_tree(const creditboost::Tree& a, const creditboost::Tree& b,
                      const creditboost::Dataset& d, double tol, std::string* why = nullptr) {
  const auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (a.nodes().size() != b.nodes().size()) {
    return fail("node count " + std::to_string(a.nodes().size()) + " vs " +
                std::to_string(b.nodes().size()));
  }
  for (std::size_t k = 0; k < a.nodes().size(); ++k) {
    const auto& x = a.nodes()[k];
    const auto& y = b.nodes()[k];
    if (x.feature != y.feature || x.left != y.left || x.right != y.right || x.count != y.count) {
      return fail("node " + std::to_string(k) + " differs in structure");
    }
    if (x.is_leaf() && std::fabs(x.weight - y.weight) > tol) {
      return fail("leaf " + std::to_string(k) + " weight differs");
    }
  }
  for (std::size_t i = 0; i < d.n_rows; ++i) {
    if (leaf_of(a, d, i) != leaf_of(b, d, i)) {
      return fail("row " + std::to_string(i) + " routed differently");
    }
  }
  return true;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace oracle
