#include "creditboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "creditboost/errors.hpp"

namespace creditboost {

bool MetricsReport::r2_defined() const { return !std::isnan(r2); }
bool MetricsReport::mape_defined() const { return !std::isnan(mape); }

MetricsReport evaluate(std::span<const double> target, std::span<const double> prediction) {
  if (target.size() != prediction.size()) {
    throw InvalidArgument("target has " + std::to_string(target.size()) +
                          " rows, prediction has " + std::to_string(prediction.size()));
  }
  if (target.empty()) throw InvalidArgument("cannot evaluate an empty prediction");

  const auto n = static_cast<double>(target.size());
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double pct_sum = 0.0;
  double y_sum = 0.0;
  std::size_t pct_rows = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = prediction[i] - target[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    y_sum += target[i];
    if (std::abs(target[i]) > kMapeZeroThreshold) {
      pct_sum += std::abs(e) / std::abs(target[i]);
      ++pct_rows;
    }
  }
  const double y_mean = y_sum / n;
  double total_ss = 0.0;
  for (double y : target) total_ss += (y - y_mean) * (y - y_mean);

  MetricsReport r;
  r.n = target.size();
  r.mae = abs_sum / n;
  r.mse = sq_sum / n;
  r.rmse = std::sqrt(r.mse);
  r.n_excluded_mape = target.size() - pct_rows;
  r.mape = pct_rows > 0 ? pct_sum / static_cast<double>(pct_rows)
                        : std::numeric_limits<double>::quiet_NaN();
  if (total_ss > 0.0) {
    r.r2 = 1.0 - sq_sum / total_ss;
  } else {
    r.r2 = sq_sum == 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

std::string format_metric(double value) {
  if (std::isnan(value)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

ReportTable build_report_table(const std::vector<ReportRow>& rows) {
  ReportTable t;
  t.header = {"Dataset", "Method", "MAE", "MAPE", "MSE", "RMSE", "R^2"};
  t.rows.reserve(rows.size());
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    t.rows.push_back({row.dataset, row.method, format_metric(m.mae), format_metric(m.mape),
                      format_metric(m.mse), format_metric(m.rmse), format_metric(m.r2)});
  }
  return t;
}

std::string render_text(const ReportTable& table) {
  std::vector<std::size_t> width(table.header.size(), 0);
  for (std::size_t c = 0; c < table.header.size(); ++c) width[c] = table.header[c].size();
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const bool numeric = c >= 2;
      const std::string pad(width[c] - cells[c].size(), ' ');
      if (c > 0) out += "  ";
      out += numeric ? pad + cells[c] : cells[c] + pad;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(table.header);
  for (const auto& row : table.rows) out += line(row);
  return out;
}

std::string render_csv(const ReportTable& table) {
  const auto quote = [](const std::string& cell) {
    if (cell.find_first_of(",\"") == std::string::npos) return cell;
    std::string q = "\"";
    for (char c : cell) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ',';
      out += quote(cells[c]);
    }
    return out + "\n";
  };
  std::string out = line(table.header);
  for (const auto& row : table.rows) out += line(row);
  return out;
}

}  // namespace creditboost
