#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "creditboost/errors.hpp"
#include "creditboost/metrics.hpp"
#include "oracles.hpp"

using namespace creditboost;

TEST(Evaluate, PerfectPrediction) {
  const std::vector<double> y = {1, 2, 3};
  const auto m = evaluate(y, y);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.mape, 0.0);
  EXPECT_EQ(m.mse, 0.0);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.r2, 1.0);
  EXPECT_EQ(m.n, 3u);
}

TEST(Evaluate, ZeroTargetsExcludedFromMape) {
  const std::vector<double> y = {0, 0}, p = {1, 3};
  const auto m = evaluate(y, p);
  EXPECT_EQ(m.mae, 2.0);
  EXPECT_EQ(m.mse, 5.0);
  EXPECT_EQ(m.rmse, std::sqrt(5.0));
  EXPECT_EQ(m.n_excluded_mape, 2u);
  EXPECT_FALSE(m.mape_defined());
}

TEST(Evaluate, MapeIsARatio) {
  const std::vector<double> y = {100, 200, 1e-9}, p = {110, 150, 5};
  const auto m = evaluate(y, p);
  EXPECT_DOUBLE_EQ(m.mape, (0.1 + 0.25) / 2);
  EXPECT_EQ(m.n_excluded_mape, 1u);
}

TEST(Evaluate, MatchesIndependentRecomputation) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> scale(0.1, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 5;
    const double s = scale(rng);
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 500 + s * g(rng);
      p[i] = y[i] + s * 0.3 * g(rng);
    }
    const auto m = evaluate(y, p);
    const auto o = oracle::metrics(y, p);
    EXPECT_TRUE(oracle::close_rel(m.mae, o.mae, 1e-12));
    EXPECT_TRUE(oracle::close_rel(m.mape, o.mape, 1e-12));
    EXPECT_TRUE(oracle::close_rel(m.mse, o.mse, 1e-12));
    EXPECT_TRUE(oracle::close_rel(m.rmse, o.rmse, 1e-12));
    if (n > 1) EXPECT_TRUE(oracle::close_rel(m.r2, o.r2, 1e-12)) << m.r2 << " vs " << o.r2;
    EXPECT_NEAR(m.rmse * m.rmse, m.mse, 1e-9 * std::max(1.0, m.mse));
    EXPECT_GE(m.mse, 0.0);
    if (n > 1) EXPECT_LE(m.r2, 1.0);
  }
}

TEST(Evaluate, ScaleEquivariance) {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> y(300), p(300);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = 600 + 30 * g(rng);
    p[i] = y[i] + 10 * g(rng);
  }
  const auto base = evaluate(y, p);
  for (double a : {0.01, 3.0, 250.0}) {
    std::vector<double> ya(y), pa(p);
    for (auto& v : ya) v *= a;
    for (auto& v : pa) v *= a;
    const auto m = evaluate(ya, pa);
    EXPECT_NEAR(m.mae, a * base.mae, 1e-9 * a * base.mae);
    EXPECT_NEAR(m.rmse, a * base.rmse, 1e-9 * a * base.rmse);
    EXPECT_NEAR(m.mse, a * a * base.mse, 1e-9 * a * a * base.mse);
    EXPECT_NEAR(m.mape, base.mape, 1e-9);
    EXPECT_NEAR(m.r2, base.r2, 1e-9);
  }
}

TEST(Evaluate, MeanPredictorHasZeroR2) {
  std::mt19937_64 rng(63);
  std::exponential_distribution<double> e(0.1);
  std::vector<double> y(97);
  for (auto& v : y) v = e(rng);
  long double sum = 0;
  for (double v : y) sum += v;
  const std::vector<double> p(y.size(), static_cast<double>(sum / y.size()));
  EXPECT_NEAR(evaluate(y, p).r2, 0.0, 1e-12);
}

TEST(Evaluate, ConstantTarget) {
  const std::vector<double> y = {4, 4, 4};
  EXPECT_EQ(evaluate(y, y).r2, 1.0);
  const std::vector<double> p = {4, 5, 4};
  const auto m = evaluate(y, p);
  EXPECT_FALSE(m.r2_defined());
  EXPECT_TRUE(std::isnan(m.r2));
}

TEST(Evaluate, RejectsEmptyAndMismatchedInput) {
  const std::vector<double> empty, one = {1}, two = {1, 2};
  EXPECT_THROW(evaluate(empty, empty), InvalidArgument);
  EXPECT_THROW(evaluate(one, two), InvalidArgument);
}

TEST(Report, HeaderOrder) {
  const auto t = build_report_table({});
  EXPECT_EQ(t.header,
            (std::vector<std::string>{"Dataset", "Method", "MAE", "MAPE", "MSE", "RMSE", "R^2"}));
  EXPECT_TRUE(t.rows.empty());
  EXPECT_EQ(render_csv(t), "Dataset,Method,MAE,MAPE,MSE,RMSE,R^2\n");
}

TEST(Report, FourDecimalRendering) {
  EXPECT_EQ(format_metric(13.10224), "13.1022");
  EXPECT_EQ(format_metric(0.21666), "0.2167");
  EXPECT_EQ(format_metric(2.0), "2.0000");
  EXPECT_EQ(format_metric(std::nan("")), "n/a");
}

TEST(Report, OneRowGivesHeaderPlusOneLine) {
  MetricsReport m;
  m.mae = 13.10224;
  m.mape = 0.2166;
  m.mse = 300;
  m.rmse = std::sqrt(300.0);
  m.r2 = 0.7118;
  const auto t = build_report_table({{"Full", "GBDT + Stacking", m}});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"Full", "GBDT + Stacking", "13.1022", "0.2166",
                                                 "300.0000", "17.3205", "0.7118"}));
  const std::string text = render_text(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  const std::string csv = render_csv(t);
  EXPECT_EQ(csv, "Dataset,Method,MAE,MAPE,MSE,RMSE,R^2\n"
                 "Full,GBDT + Stacking,13.1022,0.2166,300.0000,17.3205,0.7118\n");
}

TEST(Report, TextColumnsAligned) {
  MetricsReport m;
  const auto t = build_report_table({{"A", "Linear Regression (LR)", m}, {"Longer name", "DT", m}});
  const std::string text = render_text(t);
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t k = text.find('\n'); k != std::string::npos; k = text.find('\n', start)) {
    lines.push_back(text.substr(start, k - start));
    start = k + 1;
  }
  ASSERT_EQ(lines.size(), 3u);
  // Numbers are right-aligned, so every line ends at the same column.
  for (const auto& l : lines) EXPECT_EQ(l.size(), lines[0].size()) << l;
  EXPECT_EQ(lines[1].find("Linear"), lines[2].find("DT"));
}
