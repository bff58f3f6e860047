#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace creditboost {

enum class ColumnKind { kNumeric, kCount, kFlag };

/// The four feature groups of the operator user portrait.
enum class Subset {
  kConsumerCapacity = 0,
  kLocationTrajectory = 1,
  kAppBehavior = 2,
  kOther = 3,
};

inline constexpr std::array<Subset, 4> kAllSubsets = {
    Subset::kConsumerCapacity, Subset::kLocationTrajectory,
    Subset::kAppBehavior, Subset::kOther};

std::string_view to_string(ColumnKind kind);
std::string_view to_string(Subset subset);
/// Human-readable label used in report tables ("Consumer Capacity", ...).
std::string_view display_name(Subset subset);
ColumnKind parse_column_kind(std::string_view text);
Subset parse_subset(std::string_view text);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  Subset subset = Subset::kOther;

  bool operator==(const ColumnSpec&) const = default;
};

class Schema {
 public:
  Schema() = default;
  /// Throws InvalidArgument on duplicate names or when target_name collides
  /// with a predictor.
  Schema(std::vector<ColumnSpec> columns, std::string target_name);

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const std::string& target_name() const { return target_name_; }
  std::size_t size() const { return columns_.size(); }
  const ColumnSpec& operator[](std::size_t i) const { return columns_[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnSpec> columns_;
  std::string target_name_ = "score";
};

/// The 28 predictors of the operator feature table plus the `score` target.
Schema canonical_schema();

/// Reads a schema from the plain-text format described in README.md:
///
///     # comment
///     target = score
///     column = age numeric other
///
Schema load_schema_file(const std::filesystem::path& path);
Schema parse_schema(std::string_view text);
std::string format_schema(const Schema& schema);

/// Column-major numeric table with a target vector and per-row identifiers.
///
/// `target` is either empty (unlabeled data, e.g. prediction input) or has
/// exactly `n_rows` entries.
struct Dataset {
  Schema schema;
  std::size_t n_rows = 0;
  std::vector<double> values;
  std::vector<double> target;
  std::vector<std::string> ids;

  std::size_t n_cols() const { return schema.size(); }
  bool has_target() const { return !target.empty(); }

  std::span<const double> column(std::size_t j) const {
    return {values.data() + j * n_rows, n_rows};
  }
  std::span<double> column(std::size_t j) {
    return {values.data() + j * n_rows, n_rows};
  }
  double at(std::size_t row, std::size_t col) const {
    return values[col * n_rows + row];
  }

  /// Throws ConsistencyError when buffer sizes disagree with the schema.
  void validate_shape() const;
  bool all_finite() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset select_columns(std::span<const std::size_t> cols) const;
  /// Throws SchemaError naming every requested column that is absent.
  Dataset select_columns(std::span<const std::string> names) const;
};

/// Throws SchemaError, naming missing and unexpected columns, unless `schema`
/// has exactly `expected` predictors in that order.
void require_columns(const std::vector<std::string>& expected, const Schema& schema);

/// Builds a Dataset from row-major data. Intended for small fixtures.
Dataset make_dataset(Schema schema, const std::vector<std::vector<double>>& rows,
                     std::vector<double> target);

/// Convenience for tests and internal meta-datasets: all columns numeric and
/// in the `other` subset.
Schema numeric_schema(const std::vector<std::string>& names,
                      std::string target_name = "score");

// --- CSV -------------------------------------------------------------------

struct CsvOptions {
  /// When false, a file without the target column loads with an empty target.
  bool require_target = true;
};

/// Loads a comma-separated file whose header holds every schema column (any
/// order), optionally `id`, and the target. Empty cells become NaN.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 CsvOptions options = {});
Dataset parse_csv(std::string_view text, const Schema& schema,
                  CsvOptions options = {});

/// Writes `id`, the predictors in schema order, then the target (if present).
void write_csv(const std::filesystem::path& path, const Dataset& d);
std::string format_csv(const Dataset& d);

// --- preprocessing ---------------------------------------------------------

struct PreprocessConfig {
  bool clip_outliers = false;
  double clip_lower = 0.01;
  double clip_upper = 0.99;
};

/// Statistics learned from a training split and applied to any split.
struct PreprocessState {
  PreprocessConfig config;
  std::vector<double> medians;
  std::vector<double> clip_low;
  std::vector<double> clip_high;
};

struct PreprocessStats {
  std::size_t n_imputed = 0;
  std::size_t n_clipped = 0;
  std::size_t n_flags_coerced = 0;
};

/// Learns per-column medians (and clip bounds when enabled) from `train`.
/// Throws InvalidArgument if a column has no finite value.
PreprocessState fit_preprocess(const Dataset& train, const PreprocessConfig& config);
Dataset apply_preprocess(const Dataset& d, const PreprocessState& state,
                         PreprocessStats* stats = nullptr);
/// fit_preprocess followed by apply_preprocess on the same data.
Dataset preprocess(const Dataset& d, const PreprocessConfig& config,
                   PreprocessStats* stats = nullptr);

/// Nearest-rank percentile (q in [0,1]) of a non-empty sample.
double nearest_rank_percentile(std::vector<double> sample, double q);
/// Median with the midpoint rule for even sizes.
double median(std::vector<double> sample);

// --- partitioning ----------------------------------------------------------

std::map<Subset, Dataset> split_subsets(const Dataset& d);
/// Column names of one subset, in schema order.
std::vector<std::string> subset_columns(const Schema& schema, Subset subset);

struct TrainTestIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffles row indices with `seed` and keeps ceil(n * (1 - f)) rows for
/// training. Both index lists are returned in ascending order.
TrainTestIndices train_test_indices(std::size_t n_rows, double test_fraction,
                                    std::uint64_t seed);
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed);

// --- synthetic data ----------------------------------------------------------

/// Noise-free, unclamped part of the planted scoring function for rows of a
/// canonical-schema dataset. The finance-app threshold is the column median.
std::vector<double> planted_signal(const Dataset& d);

/// Synthetic operator records on the canonical schema with a planted target.
Dataset generate_synthetic(std::size_t n_rows, std::uint64_t seed);

}  // namespace creditboost
