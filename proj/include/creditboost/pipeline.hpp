#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "creditboost/data.hpp"
#include "creditboost/fusion.hpp"
#include "creditboost/learners.hpp"
#include "creditboost/metrics.hpp"

namespace creditboost {

/// Everything an experiment command needs. Built from a flat `key = value`
/// file; README.md lists the keys.
struct ExperimentConfig {
  /// Empty means synthetic data.
  std::filesystem::path data_path;
  /// Empty means the canonical 28-column schema.
  std::filesystem::path schema_path;
  std::size_t synthetic_rows = 5000;
  /// Defaults to `seed` when unset.
  std::optional<std::uint64_t> synthetic_seed;

  PreprocessConfig preprocess;
  double test_fraction = 0.2;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;

  /// Learners compared per subset, in report order.
  std::vector<LearnerSpec> learners;
  /// Learner used for the base models of every fusion strategy.
  LearnerSpec fusion_base;
  /// Fusion strategies compared by compare-fusion; train needs exactly one.
  std::vector<FusionConfig> fusions;

  /// Throws InvalidArgument on an empty learner list or test_fraction outside (0, 1).
  void validate() const;
  /// Copy with every learner and fusion seed replaced by `seed`.
  ExperimentConfig with_seed(std::uint64_t seed) const;
};

/// Defaults: synthetic 5000 rows, all four learners, voting/blending/stacking.
ExperimentConfig default_config();
/// Unknown keys and malformed values throw ParseError naming the line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct PreparedData {
  Dataset train;
  Dataset test;
  PreprocessState preprocess;
};

/// Loads or generates the data set, as configured, without preprocessing.
Dataset load_experiment_data(const ExperimentConfig& config);
/// Splits `raw` by config.seed, learns preprocessing on the training rows
/// and applies it to both splits.
PreparedData prepare_data(const ExperimentConfig& config, const Dataset& raw);

/// One row per subset x learner, subsets in canonical order. Every learner
/// fit is reported to `observer` first.
std::vector<ReportRow> compare_bases(const ExperimentConfig& config, const PreparedData& data,
                                     const FitObserver& observer = {});

/// Best single-subset model, full-feature model, then one row per fusion
/// strategy. "Best" is the subset whose base model has the highest test R^2.
std::vector<ReportRow> compare_fusion(const ExperimentConfig& config, const PreparedData& data,
                                      const FitObserver& observer = {});

// --- commands ----------------------------------------------------------------

void cmd_generate(std::size_t n_rows, std::uint64_t seed, const std::filesystem::path& out_path);

/// Writes bases_<subset>.{txt,csv} per subset and bases_all.{txt,csv}.
/// Returns the rendered combined text table.
std::string cmd_compare_bases(const ExperimentConfig& config);

/// Writes fusion.{txt,csv}. Returns the rendered text table.
std::string cmd_compare_fusion(const ExperimentConfig& config);

/// Fits preprocessing and the single configured fusion strategy on the
/// training split and saves both to `model_path`. Returns a summary table of
/// per-subset base-model and fused metrics on the held-out split.
std::string cmd_train(const ExperimentConfig& config, const std::filesystem::path& model_path);

/// Writes `id,score` for every row of `data_path`, in input order.
void cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                 const std::filesystem::path& out_path);

}  // namespace creditboost
