#include "creditboost/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>

#include "creditboost/errors.hpp"
#include "creditboost/serialization.hpp"
#include "file_util.hpp"
#include "text_util.hpp"

namespace creditboost {

namespace {

std::string_view strategy_label(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kAveraging: return "Averaging";
    case FusionStrategy::kVoting: return "Voting";
    case FusionStrategy::kBlending: return "Blending";
    case FusionStrategy::kStacking: return "Stacking";
  }
  return "";
}

constexpr std::string_view kAllFeaturesLabel = "All Features";

// --- config ------------------------------------------------------------------

// Experiment defaults. The library defaults favour flexible fits; these are
// regularized for the few thousand rows of a desk-scale run.
CartParams experiment_cart() { return CartParams{.max_depth = 8, .min_data_in_leaf = 20}; }

ForestParams experiment_forest() {
  ForestParams p;
  p.min_data_in_leaf = 5;
  return p;
}

BoosterParams experiment_gbdt() {
  BoosterParams p;
  p.num_iterations = 100;
  p.learning_rate = 0.05;
  p.num_leaves = 7;
  p.min_data_in_leaf = 40;
  return p;
}

struct ConfigBuilder {
  ExperimentConfig config;
  std::vector<LearnerKind> learner_kinds = {LearnerKind::kLinearRegression,
                                            LearnerKind::kDecisionTree,
                                            LearnerKind::kRandomForest, LearnerKind::kGbdt};
  LinearParams linear;
  CartParams cart = experiment_cart();
  ForestParams forest = experiment_forest();
  BoosterParams gbdt = experiment_gbdt();
  LearnerKind fusion_base = LearnerKind::kGbdt;
  std::vector<FusionStrategy> strategies = {FusionStrategy::kVoting, FusionStrategy::kBlending,
                                            FusionStrategy::kStacking};
  FusionConfig fusion;

  LearnerSpec spec(LearnerKind kind) const {
    LearnerSpec s;
    switch (kind) {
      case LearnerKind::kLinearRegression: s.params = linear; break;
      case LearnerKind::kDecisionTree: s.params = cart; break;
      case LearnerKind::kRandomForest: s.params = forest; break;
      case LearnerKind::kGbdt: s.params = gbdt; break;
    }
    s.seed = config.seed;
    return s;
  }

  ExperimentConfig build() const {
    ExperimentConfig out = config;
    out.learners.clear();
    for (auto k : learner_kinds) out.learners.push_back(spec(k));
    out.fusion_base = spec(fusion_base);
    out.fusions.clear();
    for (auto s : strategies) {
      FusionConfig f = fusion;
      f.strategy = s;
      out.fusions.push_back(f);
    }
    return out.with_seed(config.seed);
  }
};

using Setter = std::function<void(ConfigBuilder&, std::string_view)>;

[[noreturn]] void bad_value(std::string_view value, std::string_view what) {
  throw InvalidArgument("'" + std::string(value) + "' is not " + std::string(what));
}

template <typename Int>
Int as_int(std::string_view v) {
  const auto x = detail::parse_int<Int>(v);
  if (!x) bad_value(v, "an integer");
  return *x;
}

double as_double(std::string_view v) {
  const auto x = detail::parse_double(v);
  if (!x) bad_value(v, "a number");
  return *x;
}

bool as_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(v, "true or false");
}

std::vector<std::string_view> as_list(std::string_view v) {
  std::vector<std::string_view> out;
  for (auto item : detail::split(v, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"seed", [](ConfigBuilder& b, std::string_view v) { b.config.seed = as_int<std::uint64_t>(v); }},
      {"data.path", [](ConfigBuilder& b, std::string_view v) { b.config.data_path = v; }},
      {"data.schema", [](ConfigBuilder& b, std::string_view v) { b.config.schema_path = v; }},
      {"data.synthetic.n",
       [](ConfigBuilder& b, std::string_view v) { b.config.synthetic_rows = as_int<std::size_t>(v); }},
      {"data.synthetic.seed",
       [](ConfigBuilder& b, std::string_view v) { b.config.synthetic_seed = as_int<std::uint64_t>(v); }},
      {"preprocess.clip_outliers",
       [](ConfigBuilder& b, std::string_view v) { b.config.preprocess.clip_outliers = as_bool(v); }},
      {"preprocess.clip_lower",
       [](ConfigBuilder& b, std::string_view v) { b.config.preprocess.clip_lower = as_double(v); }},
      {"preprocess.clip_upper",
       [](ConfigBuilder& b, std::string_view v) { b.config.preprocess.clip_upper = as_double(v); }},
      {"split.test_fraction",
       [](ConfigBuilder& b, std::string_view v) { b.config.test_fraction = as_double(v); }},
      {"output.dir", [](ConfigBuilder& b, std::string_view v) { b.config.output_dir = v; }},
      {"learners",
       [](ConfigBuilder& b, std::string_view v) {
         b.learner_kinds.clear();
         for (auto item : as_list(v)) b.learner_kinds.push_back(parse_learner_kind(item));
       }},
      {"learner.linear.ridge_lambda",
       [](ConfigBuilder& b, std::string_view v) { b.linear.ridge_lambda = as_double(v); }},
      {"learner.cart.max_depth",
       [](ConfigBuilder& b, std::string_view v) { b.cart.max_depth = as_int<int>(v); }},
      {"learner.cart.min_data_in_leaf",
       [](ConfigBuilder& b, std::string_view v) { b.cart.min_data_in_leaf = as_int<int>(v); }},
      {"learner.forest.n_trees",
       [](ConfigBuilder& b, std::string_view v) { b.forest.n_trees = as_int<int>(v); }},
      {"learner.forest.max_depth",
       [](ConfigBuilder& b, std::string_view v) { b.forest.max_depth = as_int<int>(v); }},
      {"learner.forest.min_data_in_leaf",
       [](ConfigBuilder& b, std::string_view v) { b.forest.min_data_in_leaf = as_int<int>(v); }},
      {"learner.forest.feature_fraction",
       [](ConfigBuilder& b, std::string_view v) { b.forest.feature_fraction = as_double(v); }},
      {"learner.forest.bootstrap",
       [](ConfigBuilder& b, std::string_view v) { b.forest.bootstrap = as_bool(v); }},
      {"learner.gbdt.num_iterations",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.num_iterations = as_int<int>(v); }},
      {"learner.gbdt.learning_rate",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.learning_rate = as_double(v); }},
      {"learner.gbdt.num_leaves",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.num_leaves = as_int<int>(v); }},
      {"learner.gbdt.max_depth",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.max_depth = as_int<int>(v); }},
      {"learner.gbdt.min_data_in_leaf",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.min_data_in_leaf = as_int<int>(v); }},
      {"learner.gbdt.max_bin",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.max_bin = as_int<int>(v); }},
      {"learner.gbdt.feature_fraction",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.feature_fraction = as_double(v); }},
      {"learner.gbdt.bagging_fraction",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.bagging_fraction = as_double(v); }},
      {"learner.gbdt.bagging_freq",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.bagging_freq = as_int<int>(v); }},
      {"learner.gbdt.lambda_l2",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.lambda_l2 = as_double(v); }},
      {"learner.gbdt.min_gain_to_split",
       [](ConfigBuilder& b, std::string_view v) { b.gbdt.min_gain_to_split = as_double(v); }},
      {"fusion.base_learner",
       [](ConfigBuilder& b, std::string_view v) { b.fusion_base = parse_learner_kind(v); }},
      {"fusion.strategy",
       [](ConfigBuilder& b, std::string_view v) { b.strategies = {parse_fusion_strategy(v)}; }},
      {"fusion.strategies",
       [](ConfigBuilder& b, std::string_view v) {
         b.strategies.clear();
         for (auto item : as_list(v)) b.strategies.push_back(parse_fusion_strategy(item));
       }},
      {"fusion.n_folds",
       [](ConfigBuilder& b, std::string_view v) { b.fusion.n_folds = as_int<int>(v); }},
      {"fusion.holdout_fraction",
       [](ConfigBuilder& b, std::string_view v) { b.fusion.holdout_fraction = as_double(v); }},
      {"fusion.meta.ridge_lambda",
       [](ConfigBuilder& b, std::string_view v) {
         b.fusion.meta_learner = LearnerSpec::linear(as_double(v));
       }},
  };
  return table;
}

// --- helpers -----------------------------------------------------------------

void require_directory(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("output directory '" + dir.string() + "' does not exist");
  }
}

void require_parent_directory(const std::filesystem::path& file) {
  require_directory(file.parent_path());
}

void write_report(const std::filesystem::path& stem, const std::vector<ReportRow>& rows) {
  const auto table = build_report_table(rows);
  detail::write_file(stem.string() + ".txt", render_text(table));
  detail::write_file(stem.string() + ".csv", render_csv(table));
}

void notify(const FitObserver& observer, std::string_view stage, const Dataset& d) {
  if (observer) observer(stage, d);
}

FittedLearner observed_fit(const LearnerSpec& spec, const Dataset& train,
                           const FitObserver& observer, std::string_view stage) {
  notify(observer, stage, train);
  return fit_learner(spec, train);
}

ReportRow evaluate_row(std::string_view dataset, std::string method,
                       std::span<const double> target, std::span<const double> prediction) {
  return ReportRow{std::string(dataset), std::move(method), evaluate(target, prediction)};
}

}  // namespace

// --- ExperimentConfig ----------------------------------------------------------

void ExperimentConfig::validate() const {
  if (learners.empty()) throw InvalidArgument("config needs at least one learner");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("split.test_fraction must lie in (0, 1)");
  }
  if (data_path.empty() && synthetic_rows < 2) {
    throw InvalidArgument("data.synthetic.n must be at least 2");
  }
  for (const auto& l : learners) l.validate();
  fusion_base.validate();
  for (const auto& f : fusions) f.validate();
}

ExperimentConfig ExperimentConfig::with_seed(std::uint64_t new_seed) const {
  ExperimentConfig out = *this;
  out.seed = new_seed;
  for (auto& l : out.learners) l.seed = new_seed;
  out.fusion_base.seed = new_seed;
  for (auto& f : out.fusions) {
    f.seed = new_seed;
    f.meta_learner.seed = new_seed;
  }
  return out;
}

ExperimentConfig default_config() { return ConfigBuilder{}.build(); }

ExperimentConfig parse_config(std::string_view text) {
  ConfigBuilder builder;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + "expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(where + "unknown key '" + std::string(key) + "'");
    if (value.empty()) throw ParseError(where + "'" + std::string(key) + "' has no value");
    try {
      it->second(builder, value);
    } catch (const InvalidArgument& e) {
      throw ParseError(where + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  auto config = builder.build();
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_file(path));
}

// --- data --------------------------------------------------------------------

Dataset load_experiment_data(const ExperimentConfig& config) {
  if (config.data_path.empty()) {
    return generate_synthetic(config.synthetic_rows, config.synthetic_seed.value_or(config.seed));
  }
  const Schema schema =
      config.schema_path.empty() ? canonical_schema() : load_schema_file(config.schema_path);
  return load_csv(config.data_path, schema);
}

PreparedData prepare_data(const ExperimentConfig& config, const Dataset& raw) {
  auto [train, test] = train_test_split(raw, config.test_fraction, config.seed);
  PreparedData out;
  out.preprocess = fit_preprocess(train, config.preprocess);
  out.train = apply_preprocess(train, out.preprocess);
  out.test = apply_preprocess(test, out.preprocess);
  return out;
}

// --- comparisons ---------------------------------------------------------------

std::vector<ReportRow> compare_bases(const ExperimentConfig& config, const PreparedData& data,
                                     const FitObserver& observer) {
  config.validate();
  const auto train_parts = split_subsets(data.train);
  const auto test_parts = split_subsets(data.test);
  std::vector<ReportRow> rows;
  for (Subset s : kAllSubsets) {
    const Dataset& train = train_parts.at(s);
    const Dataset& test = test_parts.at(s);
    if (train.n_cols() == 0) {
      throw SchemaError("no columns in subset '" + std::string(to_string(s)) + "'");
    }
    for (const auto& spec : config.learners) {
      const auto model = observed_fit(spec, train, observer, to_string(s));
      rows.push_back(evaluate_row(display_name(s), std::string(display_name(spec.kind())),
                                  test.target, predict(model, test)));
    }
  }
  return rows;
}

std::vector<ReportRow> compare_fusion(const ExperimentConfig& config, const PreparedData& data,
                                      const FitObserver& observer) {
  config.validate();
  const std::string base_label(display_name(config.fusion_base.kind()));
  const auto train_parts = split_subsets(data.train);
  const auto test_parts = split_subsets(data.test);

  std::optional<ReportRow> best;
  for (Subset s : kAllSubsets) {
    const auto model = observed_fit(config.fusion_base, train_parts.at(s), observer, to_string(s));
    auto row = evaluate_row(display_name(s), base_label, test_parts.at(s).target,
                            predict(model, test_parts.at(s)));
    if (!best || row.metrics.r2 > best->metrics.r2) best = std::move(row);
  }

  std::vector<ReportRow> rows;
  rows.push_back(*best);
  const auto full = observed_fit(config.fusion_base, data.train, observer, "full");
  rows.push_back(
      evaluate_row(kAllFeaturesLabel, base_label, data.test.target, predict(full, data.test)));
  for (const auto& fc : config.fusions) {
    const auto model = fit_fusion(data.train, fc, config.fusion_base, observer);
    rows.push_back(evaluate_row(kAllFeaturesLabel,
                                base_label + " + " + std::string(strategy_label(fc.strategy)),
                                data.test.target, predict_fusion(model, data.test)));
  }
  return rows;
}

// --- commands ------------------------------------------------------------------

void cmd_generate(std::size_t n_rows, std::uint64_t seed, const std::filesystem::path& out_path) {
  require_parent_directory(out_path);
  write_csv(out_path, generate_synthetic(n_rows, seed));
}

std::string cmd_compare_bases(const ExperimentConfig& config) {
  config.validate();
  require_directory(config.output_dir);
  const auto data = prepare_data(config, load_experiment_data(config));
  const auto rows = compare_bases(config, data);
  for (Subset s : kAllSubsets) {
    std::vector<ReportRow> part;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(part),
                 [&](const ReportRow& r) { return r.dataset == display_name(s); });
    write_report(config.output_dir / ("bases_" + std::string(to_string(s))), part);
  }
  write_report(config.output_dir / "bases_all", rows);
  return render_text(build_report_table(rows));
}

std::string cmd_compare_fusion(const ExperimentConfig& config) {
  config.validate();
  require_directory(config.output_dir);
  const auto data = prepare_data(config, load_experiment_data(config));
  const auto rows = compare_fusion(config, data);
  write_report(config.output_dir / "fusion", rows);
  return render_text(build_report_table(rows));
}

std::string cmd_train(const ExperimentConfig& config, const std::filesystem::path& model_path) {
  config.validate();
  if (config.fusions.size() != 1) {
    throw InvalidArgument("train needs exactly one fusion strategy (set fusion.strategies), got " +
                          std::to_string(config.fusions.size()));
  }
  require_parent_directory(model_path);
  const auto data = prepare_data(config, load_experiment_data(config));
  const auto& fc = config.fusions.front();
  ScoringPipeline pipeline{data.preprocess, fit_fusion(data.train, fc, config.fusion_base)};
  save_pipeline(model_path, pipeline);

  const auto meta = base_predictions(pipeline.model.base_models, data.test);
  std::vector<ReportRow> rows;
  std::size_t b = 0;
  for (const auto& [subset, learner] : pipeline.model.base_models) {
    rows.push_back(evaluate_row(display_name(subset), std::string(display_name(learner.kind())),
                                data.test.target, meta.data.column(b++)));
  }
  rows.push_back(evaluate_row(
      kAllFeaturesLabel,
      std::string(display_name(config.fusion_base.kind())) + " + " +
          std::string(strategy_label(fc.strategy)),
      data.test.target, predict_fusion(pipeline.model, data.test)));
  return render_text(build_report_table(rows));
}

void cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                 const std::filesystem::path& out_path) {
  require_parent_directory(out_path);
  const auto pipeline = load_pipeline(model_path);
  const auto raw = load_csv(data_path, pipeline.model.schema, CsvOptions{.require_target = false});
  Dataset input = raw;
  input.target.clear();
  const auto scores = predict_fusion(pipeline.model, apply_preprocess(input, pipeline.preprocess));
  std::string out = "id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out += raw.ids[i];
    out += ',';
    out += detail::format_double(scores[i]);
    out += '\n';
  }
  detail::write_file(out_path, out);
}

}  // namespace creditboost
