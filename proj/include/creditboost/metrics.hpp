#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace creditboost {

/// Absolute targets at or below this are left out of MAPE.
inline constexpr double kMapeZeroThreshold = 1e-8;

struct MetricsReport {
  double mae = 0.0;
  /// Ratio, not percent. NaN when every row was excluded.
  double mape = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  /// NaN when the target is constant and the fit is not perfect.
  double r2 = 0.0;
  std::size_t n = 0;
  std::size_t n_excluded_mape = 0;

  bool r2_defined() const;
  bool mape_defined() const;
};

/// MAE, MAPE, MSE, RMSE and R^2 of `prediction` against `target`.
/// Throws InvalidArgument on empty input or a length mismatch.
MetricsReport evaluate(std::span<const double> target, std::span<const double> prediction);

struct ReportRow {
  std::string dataset;
  std::string method;
  MetricsReport metrics;
};

/// Rendered cells; the header is Dataset, Method, MAE, MAPE, MSE, RMSE, R^2.
struct ReportTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Formats a metric with four decimals ("n/a" for undefined values).
std::string format_metric(double value);

ReportTable build_report_table(const std::vector<ReportRow>& rows);
/// Space-padded columns, one line per row after the header.
std::string render_text(const ReportTable& table);
std::string render_csv(const ReportTable& table);

}  // namespace creditboost
