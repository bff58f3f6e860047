#include "creditboost/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "creditboost/errors.hpp"
#include "file_util.hpp"
#include "text_util.hpp"

namespace creditboost {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

/// Splits one CSV record. Double-quoted fields may contain commas; "" inside
/// quotes is an escaped quote.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCount: return "count";
    case ColumnKind::kFlag: return "flag";
  }
  return "numeric";
}

std::string_view to_string(Subset subset) {
  switch (subset) {
    case Subset::kConsumerCapacity: return "consumer_capacity";
    case Subset::kLocationTrajectory: return "location_trajectory";
    case Subset::kAppBehavior: return "app_behavior";
    case Subset::kOther: return "other";
  }
  return "other";
}

std::string_view display_name(Subset subset) {
  switch (subset) {
    case Subset::kConsumerCapacity: return "Consumer Capacity";
    case Subset::kLocationTrajectory: return "Location Trajectory";
    case Subset::kAppBehavior: return "Application Behavior Preference";
    case Subset::kOther: return "Other";
  }
  return "Other";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "numeric") return ColumnKind::kNumeric;
  if (text == "count") return ColumnKind::kCount;
  if (text == "flag") return ColumnKind::kFlag;
  throw ParseError("unknown column kind '" + std::string(text) + "'");
}

Subset parse_subset(std::string_view text) {
  for (Subset s : kAllSubsets) {
    if (to_string(s) == text) return s;
  }
  throw ParseError("unknown feature subset '" + std::string(text) + "'");
}

// --- Schema -------------------------------------------------------------------

Schema::Schema(std::vector<ColumnSpec> columns, std::string target_name)
    : columns_(std::move(columns)), target_name_(std::move(target_name)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw InvalidArgument("empty column name in schema");
    if (!seen.insert(c.name).second) {
      throw InvalidArgument("duplicate column '" + c.name + "' in schema");
    }
  }
  if (seen.contains(target_name_)) {
    throw InvalidArgument("target '" + target_name_ + "' is also a predictor");
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

Schema canonical_schema() {
  using K = ColumnKind;
  using S = Subset;
  // Field order follows the operator data dictionary, minus `id` and `score`.
  std::vector<ColumnSpec> cols = {
      {"age", K::kNumeric, S::kOther},
      {"net_age_till_now", K::kNumeric, S::kOther},
      {"top_up_month_diff", K::kNumeric, S::kConsumerCapacity},
      {"top_up_amount", K::kNumeric, S::kConsumerCapacity},
      {"recent_6month_avg_use", K::kNumeric, S::kConsumerCapacity},
      {"total_account_fee", K::kNumeric, S::kConsumerCapacity},
      {"curr_month_balance", K::kNumeric, S::kConsumerCapacity},
      {"connect_num", K::kCount, S::kOther},
      {"recent_3month_shopping_count", K::kCount, S::kLocationTrajectory},
      {"online_shopping_count", K::kCount, S::kAppBehavior},
      {"express_count", K::kCount, S::kAppBehavior},
      {"finance_app_count", K::kCount, S::kAppBehavior},
      {"video_app_count", K::kCount, S::kAppBehavior},
      {"flight_count", K::kCount, S::kAppBehavior},
      {"train_count", K::kCount, S::kAppBehavior},
      {"tour_app_count", K::kCount, S::kAppBehavior},
      {"cost_sensitivity", K::kNumeric, S::kConsumerCapacity},
      {"true_name_flag", K::kFlag, S::kOther},
      {"uni_student_flag", K::kFlag, S::kOther},
      {"blk_list_flag", K::kFlag, S::kOther},
      {"4g_unhealth_flag", K::kFlag, S::kOther},
      {"curr_overdue_flag", K::kFlag, S::kConsumerCapacity},
      {"freq_shopping_flag", K::kFlag, S::kLocationTrajectory},
      {"wanda_flag", K::kFlag, S::kLocationTrajectory},
      {"sam_flag", K::kFlag, S::kLocationTrajectory},
      {"movie_flag", K::kFlag, S::kLocationTrajectory},
      {"tour_flag", K::kFlag, S::kLocationTrajectory},
      {"sport_flag", K::kFlag, S::kLocationTrajectory},
  };
  return Schema(std::move(cols), "score");
}

Schema parse_schema(std::string_view text) {
  std::vector<ColumnSpec> cols;
  std::string target = "score";
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("schema line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key == "target") {
      if (value.empty()) {
        throw ParseError("schema line " + std::to_string(line_no) + ": empty target");
      }
      target = std::string(value);
    } else if (key == "column") {
      const auto parts = detail::tokens(value);
      if (parts.size() != 3) {
        throw ParseError("schema line " + std::to_string(line_no) +
                         ": expected 'column = <name> <kind> <subset>'");
      }
      cols.push_back({std::string(parts[0]), parse_column_kind(parts[1]),
                      parse_subset(parts[2])});
    } else {
      throw ParseError("schema line " + std::to_string(line_no) + ": unknown key '" +
                       std::string(key) + "'");
    }
  }
  try {
    return Schema(std::move(cols), std::move(target));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

Schema load_schema_file(const std::filesystem::path& path) {
  return parse_schema(detail::read_file(path));
}

std::string format_schema(const Schema& schema) {
  std::string out = "target = " + schema.target_name() + "\n";
  for (const auto& c : schema.columns()) {
    out += "column = " + c.name + " " + std::string(to_string(c.kind)) + " " +
           std::string(to_string(c.subset)) + "\n";
  }
  return out;
}

// --- Dataset ------------------------------------------------------------------

void Dataset::validate_shape() const {
  if (values.size() != n_rows * n_cols()) {
    throw ConsistencyError("dataset value buffer does not match n_rows x n_cols");
  }
  if (!target.empty() && target.size() != n_rows) {
    throw ConsistencyError("dataset target length differs from n_rows");
  }
  if (ids.size() != n_rows) {
    throw ConsistencyError("dataset id column length differs from n_rows");
  }
}

bool Dataset::all_finite() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(values.begin(), values.end(), finite) &&
         std::all_of(target.begin(), target.end(), finite);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.schema = schema;
  out.n_rows = rows.size();
  out.values.resize(rows.size() * n_cols());
  for (std::size_t j = 0; j < n_cols(); ++j) {
    const auto src = column(j);
    auto dst = out.column(j);
    for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
  }
  if (has_target()) {
    out.target.reserve(rows.size());
    for (auto r : rows) out.target.push_back(target[r]);
  }
  out.ids.reserve(rows.size());
  for (auto r : rows) out.ids.push_back(ids[r]);
  return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols) const {
  std::vector<ColumnSpec> specs;
  specs.reserve(cols.size());
  for (auto c : cols) specs.push_back(schema[c]);
  Dataset out;
  out.schema = Schema(std::move(specs), schema.target_name());
  out.n_rows = n_rows;
  out.values.reserve(cols.size() * n_rows);
  for (auto c : cols) {
    const auto src = column(c);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  out.target = target;
  out.ids = ids;
  return out;
}

Dataset Dataset::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  std::vector<std::string> missing;
  for (const auto& name : names) {
    if (auto i = schema.index_of(name)) {
      idx.push_back(*i);
    } else {
      missing.push_back(name);
    }
  }
  if (!missing.empty()) throw SchemaError("missing columns: " + join(missing));
  return select_columns(std::span<const std::size_t>(idx));
}

void require_columns(const std::vector<std::string>& expected, const Schema& schema) {
  const auto got = schema.names();
  if (got == expected) return;
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  for (const auto& name : expected) {
    if (std::find(got.begin(), got.end(), name) == got.end()) missing.push_back(name);
  }
  for (const auto& name : got) {
    if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
      extra.push_back(name);
    }
  }
  std::string msg = "dataset columns do not match the fitted model";
  if (!missing.empty()) msg += "; missing: " + join(missing);
  if (!extra.empty()) msg += "; unexpected: " + join(extra);
  if (missing.empty() && extra.empty()) msg += "; column order differs";
  throw SchemaError(msg);
}

Dataset make_dataset(Schema schema, const std::vector<std::vector<double>>& rows,
                     std::vector<double> target) {
  Dataset d;
  d.schema = std::move(schema);
  d.n_rows = rows.size();
  d.values.assign(d.n_rows * d.n_cols(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d.n_cols()) {
      throw InvalidArgument("row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " values, schema has " +
                            std::to_string(d.n_cols()));
    }
    for (std::size_t j = 0; j < d.n_cols(); ++j) d.column(j)[i] = rows[i][j];
  }
  d.target = std::move(target);
  d.ids.reserve(d.n_rows);
  for (std::size_t i = 0; i < d.n_rows; ++i) d.ids.push_back(std::to_string(i));
  d.validate_shape();
  return d;
}

Schema numeric_schema(const std::vector<std::string>& names, std::string target_name) {
  std::vector<ColumnSpec> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back({n, ColumnKind::kNumeric, Subset::kOther});
  return Schema(std::move(cols), std::move(target_name));
}

// --- CSV ------------------------------------------------------------------------

Dataset parse_csv(std::string_view text, const Schema& schema, CsvOptions options) {
  auto lines = detail::split(text, '\n');
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError("CSV input has no header row");

  auto header = split_csv_line(lines.front());
  for (auto& h : header) h = std::string(detail::trim(h));
  if (!header.empty() && header.front().starts_with("\xEF\xBB\xBF")) {
    header.front().erase(0, 3);
  }

  // Map every file column to its role.
  constexpr std::ptrdiff_t kId = -1;
  constexpr std::ptrdiff_t kTarget = -2;
  std::vector<std::ptrdiff_t> role(header.size());
  std::vector<bool> present(schema.size(), false);
  bool has_target = false;
  std::vector<std::string> unknown;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "id") {
      role[k] = kId;
    } else if (header[k] == schema.target_name()) {
      role[k] = kTarget;
      has_target = true;
    } else if (auto idx = schema.index_of(header[k])) {
      if (present[*idx]) throw SchemaError("duplicate CSV column '" + header[k] + "'");
      present[*idx] = true;
      role[k] = static_cast<std::ptrdiff_t>(*idx);
    } else {
      unknown.push_back(header[k]);
    }
  }
  if (!unknown.empty()) throw SchemaError("unknown CSV columns: " + join(unknown));
  std::vector<std::string> missing;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (!present[j]) missing.push_back(schema[j].name);
  }
  if (options.require_target && !has_target) missing.push_back(schema.target_name());
  if (!missing.empty()) throw SchemaError("missing CSV columns: " + join(missing));

  const std::size_t n_rows = lines.size() - 1;
  Dataset d;
  d.schema = schema;
  d.n_rows = n_rows;
  d.values.assign(n_rows * schema.size(), kNaN);
  if (has_target) d.target.assign(n_rows, kNaN);
  d.ids.resize(n_rows);

  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto fields = split_csv_line(lines[i + 1]);
    if (fields.size() != header.size()) {
      throw ParseError("CSV row " + std::to_string(i + 1) + ": expected " +
                       std::to_string(header.size()) + " cells, found " +
                       std::to_string(fields.size()));
    }
    d.ids[i] = std::to_string(i);
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto cell = detail::trim(fields[k]);
      if (role[k] == kId) {
        if (!cell.empty()) d.ids[i] = std::string(cell);
        continue;
      }
      if (cell.empty()) continue;  // missing
      const auto value = detail::parse_double(cell);
      if (!value) {
        throw ParseError("CSV row " + std::to_string(i + 1) + ", column '" + header[k] +
                         "': cannot parse '" + std::string(cell) + "' as a number");
      }
      if (role[k] == kTarget) {
        d.target[i] = *value;
      } else {
        d.column(static_cast<std::size_t>(role[k]))[i] = *value;
      }
    }
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 CsvOptions options) {
  try {
    return parse_csv(detail::read_file(path), schema, options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const Dataset& d) {
  std::string out = "id";
  for (const auto& c : d.schema.columns()) out += "," + c.name;
  if (d.has_target()) out += "," + d.schema.target_name();
  out += '\n';
  for (std::size_t i = 0; i < d.n_rows; ++i) {
    out += d.ids[i];
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      out += ',';
      const double v = d.at(i, j);
      if (!std::isnan(v)) out += detail::format_double(v);
    }
    if (d.has_target()) {
      out += ',';
      if (!std::isnan(d.target[i])) out += detail::format_double(d.target[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& d) {
  detail::write_file(path, format_csv(d));
}

// --- preprocessing ------------------------------------------------------------

double median(std::vector<double> sample) {
  if (sample.empty()) throw InvalidArgument("median of an empty sample");
  const std::size_t mid = sample.size() / 2;
  std::nth_element(sample.begin(), sample.begin() + mid, sample.end());
  const double upper = sample[mid];
  if (sample.size() % 2 == 1) return upper;
  const double lower = *std::max_element(sample.begin(), sample.begin() + mid);
  return lower + (upper - lower) / 2.0;
}

double nearest_rank_percentile(std::vector<double> sample, double q) {
  if (sample.empty()) throw InvalidArgument("percentile of an empty sample");
  const auto n = sample.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sample.begin(), sample.begin() + (rank - 1), sample.end());
  return sample[rank - 1];
}

namespace {

double coerce_flag(double v) { return v != 0.0 ? 1.0 : 0.0; }

}  // namespace

PreprocessState fit_preprocess(const Dataset& train, const PreprocessConfig& config) {
  if (config.clip_outliers &&
      !(config.clip_lower >= 0.0 && config.clip_lower < config.clip_upper &&
        config.clip_upper <= 1.0)) {
    throw InvalidArgument("clip percentiles must satisfy 0 <= lower < upper <= 1");
  }
  PreprocessState state;
  state.config = config;
  const std::size_t m = train.n_cols();
  state.medians.resize(m);
  state.clip_low.assign(m, -std::numeric_limits<double>::infinity());
  state.clip_high.assign(m, std::numeric_limits<double>::infinity());

  for (std::size_t j = 0; j < m; ++j) {
    const bool is_flag = train.schema[j].kind == ColumnKind::kFlag;
    std::vector<double> observed;
    observed.reserve(train.n_rows);
    for (double v : train.column(j)) {
      if (std::isfinite(v)) observed.push_back(is_flag ? coerce_flag(v) : v);
    }
    if (observed.empty()) {
      throw InvalidArgument("column '" + train.schema[j].name +
                            "' has no observed values; median imputation impossible");
    }
    state.medians[j] = median(observed);
    if (config.clip_outliers && train.schema[j].kind == ColumnKind::kNumeric) {
      // Bounds are taken on the imputed column so a second pass reproduces them.
      std::vector<double> imputed(train.n_rows, state.medians[j]);
      const auto col = train.column(j);
      for (std::size_t i = 0; i < train.n_rows; ++i) {
        if (std::isfinite(col[i])) imputed[i] = col[i];
      }
      state.clip_low[j] = nearest_rank_percentile(imputed, config.clip_lower);
      state.clip_high[j] = nearest_rank_percentile(std::move(imputed), config.clip_upper);
    }
  }
  return state;
}

Dataset apply_preprocess(const Dataset& d, const PreprocessState& state,
                         PreprocessStats* stats) {
  if (state.medians.size() != d.n_cols()) {
    throw SchemaError("preprocess state was fit on " + std::to_string(state.medians.size()) +
                      " columns, dataset has " + std::to_string(d.n_cols()));
  }
  PreprocessStats local;
  Dataset out = d;
  for (std::size_t j = 0; j < out.n_cols(); ++j) {
    const ColumnKind kind = out.schema[j].kind;
    for (double& v : out.column(j)) {
      if (!std::isfinite(v)) {
        v = state.medians[j];
        ++local.n_imputed;
      }
      if (kind == ColumnKind::kFlag) {
        const double f = coerce_flag(v);
        if (f != v) ++local.n_flags_coerced;
        v = f;
      } else if (kind == ColumnKind::kNumeric && state.config.clip_outliers) {
        const double c = std::clamp(v, state.clip_low[j], state.clip_high[j]);
        if (c != v) ++local.n_clipped;
        v = c;
      }
    }
  }
  for (std::size_t i = 0; i < out.target.size(); ++i) {
    if (!std::isfinite(out.target[i])) {
      throw InvalidArgument("target '" + out.schema.target_name() + "' missing at row " +
                            std::to_string(i + 1) + " (id " + out.ids[i] + ")");
    }
  }
  if (stats) *stats = local;
  return out;
}

Dataset preprocess(const Dataset& d, const PreprocessConfig& config,
                   PreprocessStats* stats) {
  return apply_preprocess(d, fit_preprocess(d, config), stats);
}

// --- partitioning -------------------------------------------------------------

std::vector<std::string> subset_columns(const Schema& schema, Subset subset) {
  std::vector<std::string> out;
  for (const auto& c : schema.columns()) {
    if (c.subset == subset) out.push_back(c.name);
  }
  return out;
}

std::map<Subset, Dataset> split_subsets(const Dataset& d) {
  std::map<Subset, Dataset> out;
  for (Subset s : kAllSubsets) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      if (d.schema[j].subset == s) cols.push_back(j);
    }
    out.emplace(s, d.select_columns(std::span<const std::size_t>(cols)));
  }
  return out;
}

TrainTestIndices train_test_indices(std::size_t n_rows, double test_fraction,
                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  if (n_rows < 2) throw InvalidArgument("train/test split needs at least two rows");
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n_rows) * (1.0 - test_fraction) - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n_rows - 1);

  TrainTestIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed) {
  const auto idx = train_test_indices(d.n_rows, test_fraction, seed);
  return {d.select_rows(idx.train), d.select_rows(idx.test)};
}

}  // namespace creditboost
