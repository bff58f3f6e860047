#include "creditboost/serialization.hpp"

#include <string>
#include <vector>

#include "creditboost/errors.hpp"
#include "file_util.hpp"
#include "text_util.hpp"

namespace creditboost {

namespace {

constexpr int kFormatVersion = 1;

class Writer {
 public:
  Writer& key(std::string_view k) {
    if (!out_.empty() && out_.back() != '\n') out_ += '\n';
    out_ += k;
    return *this;
  }
  Writer& word(std::string_view w) {
    out_ += ' ';
    out_ += w;
    return *this;
  }
  Writer& num(double v) { return word(detail::format_double(v)); }
  template <typename Int>
  Writer& integer(Int v) { return word(std::to_string(v)); }

  template <typename T>
  Writer& nums(const std::vector<T>& values) {
    integer(values.size());
    for (const auto& v : values) {
      if constexpr (std::is_floating_point_v<T>) {
        num(v);
      } else {
        integer(v);
      }
    }
    return *this;
  }
  Writer& words(const std::vector<std::string>& values) {
    integer(values.size());
    for (const auto& v : values) word(v);
    return *this;
  }

  std::string finish() {
    if (!out_.empty() && out_.back() != '\n') out_ += '\n';
    return std::move(out_);
  }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view text) {
    std::size_t number = 0;
    for (auto raw : detail::split(text, '\n')) {
      ++number;
      const auto line = detail::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      lines_.push_back({number, detail::tokens(line)});
    }
  }

  /// Consumes the next line, which must start with `key`; returns its arguments.
  std::vector<std::string_view> line(std::string_view key) {
    if (pos_ >= lines_.size()) fail("unexpected end of model text, expected '" +
                                    std::string(key) + "'");
    const auto& l = lines_[pos_++];
    current_ = l.number;
    if (l.tokens.front() != key) {
      fail("expected '" + std::string(key) + "', found '" + std::string(l.tokens.front()) + "'");
    }
    return {l.tokens.begin() + 1, l.tokens.end()};
  }

  std::vector<std::string_view> line(std::string_view key, std::size_t n_args) {
    auto args = line(key);
    if (args.size() != n_args) {
      fail("'" + std::string(key) + "' takes " + std::to_string(n_args) + " value(s), got " +
           std::to_string(args.size()));
    }
    return args;
  }

  std::string_view word(std::string_view key) { return line(key, 1)[0]; }
  double num(std::string_view key) { return to_double(word(key)); }
  template <typename Int>
  Int integer(std::string_view key) { return to_int<Int>(word(key)); }

  std::vector<double> nums(std::string_view key) {
    const auto args = counted(key);
    std::vector<double> out;
    out.reserve(args.size());
    for (auto a : args) out.push_back(to_double(a));
    return out;
  }
  template <typename Int>
  std::vector<Int> ints(std::string_view key) {
    const auto args = counted(key);
    std::vector<Int> out;
    out.reserve(args.size());
    for (auto a : args) out.push_back(to_int<Int>(a));
    return out;
  }
  std::vector<std::string> words(std::string_view key) {
    const auto args = counted(key);
    return {args.begin(), args.end()};
  }

  bool at_end() const { return pos_ >= lines_.size(); }

  double to_double(std::string_view s) const {
    const auto v = detail::parse_double(s);
    if (!v) fail("'" + std::string(s) + "' is not a number");
    return *v;
  }
  template <typename Int>
  Int to_int(std::string_view s) const {
    const auto v = detail::parse_int<Int>(s);
    if (!v) fail("'" + std::string(s) + "' is not an integer");
    return *v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("model text line " + std::to_string(current_) + ": " + msg);
  }

 private:
  std::vector<std::string_view> counted(std::string_view key) {
    auto args = line(key);
    if (args.empty()) fail("'" + std::string(key) + "' needs a count");
    const auto n = to_int<std::size_t>(args[0]);
    if (args.size() != n + 1) {
      fail("'" + std::string(key) + "' announces " + std::to_string(n) + " values, has " +
           std::to_string(args.size() - 1));
    }
    return {args.begin() + 1, args.end()};
  }

  struct Line {
    std::size_t number;
    std::vector<std::string_view> tokens;
  };
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  std::size_t current_ = 0;
};

void write_header(Writer& w, std::string_view magic) { w.key(magic).integer(kFormatVersion); }

void read_header(Reader& r, std::string_view magic) {
  const int version = r.integer<int>(magic);
  if (version != kFormatVersion) {
    r.fail("unsupported format version " + std::to_string(version));
  }
}

// --- trees -----------------------------------------------------------------

void write_tree(Writer& w, const Tree& tree) {
  w.key("tree").integer(tree.nodes().size());
  for (const auto& n : tree.nodes()) {
    w.key("node")
        .integer(n.feature)
        .integer(n.bin_threshold)
        .num(n.threshold)
        .integer(n.left)
        .integer(n.right)
        .num(n.weight)
        .integer(n.count)
        .num(n.gain);
  }
}

Tree read_tree(Reader& r) {
  const auto n_nodes = r.integer<std::size_t>("tree");
  std::vector<TreeNode> nodes(n_nodes);
  for (auto& n : nodes) {
    const auto a = r.line("node", 8);
    n.feature = r.to_int<int>(a[0]);
    n.bin_threshold = r.to_int<int>(a[1]);
    n.threshold = r.to_double(a[2]);
    n.left = r.to_int<int>(a[3]);
    n.right = r.to_int<int>(a[4]);
    n.weight = r.to_double(a[5]);
    n.count = r.to_int<std::size_t>(a[6]);
    n.gain = r.to_double(a[7]);
  }
  try {
    return Tree(std::move(nodes));
  } catch (const InvalidArgument& e) {
    r.fail(e.what());
  }
}

// --- gbdt ------------------------------------------------------------------

void write_booster_params(Writer& w, const BoosterParams& p) {
  w.key("num_iterations").integer(p.num_iterations);
  w.key("learning_rate").num(p.learning_rate);
  w.key("num_leaves").integer(p.num_leaves);
  w.key("max_depth").integer(p.max_depth);
  w.key("min_data_in_leaf").integer(p.min_data_in_leaf);
  w.key("max_bin").integer(p.max_bin);
  w.key("feature_fraction").num(p.feature_fraction);
  w.key("bagging_fraction").num(p.bagging_fraction);
  w.key("bagging_freq").integer(p.bagging_freq);
  w.key("lambda_l2").num(p.lambda_l2);
  w.key("min_gain_to_split").num(p.min_gain_to_split);
  w.key("objective").word("regression_l2");
  w.key("seed").integer(p.seed);
}

BoosterParams read_booster_params(Reader& r) {
  BoosterParams p;
  p.num_iterations = r.integer<int>("num_iterations");
  p.learning_rate = r.num("learning_rate");
  p.num_leaves = r.integer<int>("num_leaves");
  p.max_depth = r.integer<int>("max_depth");
  p.min_data_in_leaf = r.integer<int>("min_data_in_leaf");
  p.max_bin = r.integer<int>("max_bin");
  p.feature_fraction = r.num("feature_fraction");
  p.bagging_fraction = r.num("bagging_fraction");
  p.bagging_freq = r.integer<int>("bagging_freq");
  p.lambda_l2 = r.num("lambda_l2");
  p.min_gain_to_split = r.num("min_gain_to_split");
  if (r.word("objective") != "regression_l2") r.fail("unknown objective");
  p.seed = r.integer<std::uint64_t>("seed");
  return p;
}

void write_gbdt_body(Writer& w, const BoostedModel& m) {
  write_booster_params(w, m.params);
  w.key("features").words(m.feature_names);
  w.key("base_score").num(m.base_score);
  w.key("bin_max").integer(m.mapper.max_bin());
  w.key("bin_features").integer(m.mapper.n_features());
  for (std::size_t f = 0; f < m.mapper.n_features(); ++f) {
    w.key("edges").nums(m.mapper.upper_edges(f));
  }
  w.key("trees").integer(m.trees.size());
  for (const auto& t : m.trees) write_tree(w, t);
}

BoostedModel read_gbdt_body(Reader& r) {
  BoostedModel m;
  m.params = read_booster_params(r);
  m.feature_names = r.words("features");
  m.base_score = r.num("base_score");
  const int max_bin = r.integer<int>("bin_max");
  const auto n_features = r.integer<std::size_t>("bin_features");
  if (n_features != m.feature_names.size()) r.fail("bin feature count disagrees with features");
  std::vector<std::vector<double>> edges(n_features);
  for (auto& e : edges) e = r.nums("edges");
  try {
    m.mapper = BinMapper(std::move(edges), max_bin);
  } catch (const InvalidArgument& e) {
    r.fail(e.what());
  }
  const auto n_trees = r.integer<std::size_t>("trees");
  m.trees.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) m.trees.push_back(read_tree(r));
  return m;
}

// --- learners --------------------------------------------------------------

void write_linear(Writer& w, const LinearModel& m) {
  w.key("means").nums(m.means);
  w.key("scales").nums(m.scales);
  w.key("coefficients").nums(m.coefficients);
  w.key("intercept").num(m.intercept);
}

LinearModel read_linear(Reader& r, std::size_t n_features) {
  LinearModel m;
  m.means = r.nums("means");
  m.scales = r.nums("scales");
  m.coefficients = r.nums("coefficients");
  m.intercept = r.num("intercept");
  if (m.means.size() != n_features || m.scales.size() != n_features ||
      m.coefficients.size() != n_features) {
    r.fail("linear model arrays do not match the feature count");
  }
  return m;
}

void write_learner(Writer& w, const FittedLearner& l) {
  w.key("learner").word(to_string(l.kind()));
  w.key("learner_seed").integer(l.spec.seed);
  w.key("features").words(l.feature_names);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          w.key("ridge_lambda").num(p.ridge_lambda);
        } else if constexpr (std::is_same_v<P, CartParams>) {
          w.key("max_depth").integer(p.max_depth);
          w.key("min_data_in_leaf").integer(p.min_data_in_leaf);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          w.key("n_trees").integer(p.n_trees);
          w.key("max_depth").integer(p.max_depth);
          w.key("min_data_in_leaf").integer(p.min_data_in_leaf);
          w.key("feature_fraction").num(p.feature_fraction);
          w.key("bootstrap").integer(p.bootstrap ? 1 : 0);
        }
        // gbdt parameters travel inside the model body.
      },
      l.spec.params);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearModel>) {
          write_linear(w, m);
        } else if constexpr (std::is_same_v<M, CartModel>) {
          write_tree(w, m.tree);
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          w.key("forest").integer(m.trees.size());
          for (std::size_t t = 0; t < m.trees.size(); ++t) {
            w.key("tree_seed").integer(m.tree_seeds[t]);
            write_tree(w, m.trees[t]);
          }
        } else {
          write_gbdt_body(w, m);
        }
      },
      l.model);
  w.key("end").word("learner");
}

FittedLearner read_learner(Reader& r) {
  FittedLearner l;
  LearnerKind kind{};
  try {
    kind = parse_learner_kind(r.word("learner"));
  } catch (const ParseError& e) {
    r.fail(e.what());
  }
  l.spec.seed = r.integer<std::uint64_t>("learner_seed");
  l.feature_names = r.words("features");
  switch (kind) {
    case LearnerKind::kLinearRegression: {
      l.spec.params = LinearParams{r.num("ridge_lambda")};
      l.model = read_linear(r, l.feature_names.size());
      break;
    }
    case LearnerKind::kDecisionTree: {
      CartParams p;
      p.max_depth = r.integer<int>("max_depth");
      p.min_data_in_leaf = r.integer<int>("min_data_in_leaf");
      l.spec.params = p;
      l.model = CartModel{read_tree(r)};
      break;
    }
    case LearnerKind::kRandomForest: {
      ForestParams p;
      p.n_trees = r.integer<int>("n_trees");
      p.max_depth = r.integer<int>("max_depth");
      p.min_data_in_leaf = r.integer<int>("min_data_in_leaf");
      p.feature_fraction = r.num("feature_fraction");
      p.bootstrap = r.integer<int>("bootstrap") != 0;
      l.spec.params = p;
      ForestModel m;
      const auto n = r.integer<std::size_t>("forest");
      for (std::size_t t = 0; t < n; ++t) {
        m.tree_seeds.push_back(r.integer<std::uint64_t>("tree_seed"));
        m.trees.push_back(read_tree(r));
      }
      l.model = std::move(m);
      break;
    }
    case LearnerKind::kGbdt: {
      BoostedModel m = read_gbdt_body(r);
      if (m.feature_names != l.feature_names) r.fail("gbdt features disagree with learner");
      l.spec.params = m.params;
      l.model = std::move(m);
      break;
    }
  }
  if (r.word("end") != "learner") r.fail("expected 'end learner'");
  return l;
}

void write_fusion(Writer& w, const FusionModel& model) {
  write_header(w, "creditboost-fusion");
  w.key("strategy").word(to_string(model.strategy));
  w.key("target").word(model.schema.target_name());
  w.key("columns").integer(model.schema.size());
  for (const auto& c : model.schema.columns()) {
    w.key("column").word(c.name).word(to_string(c.kind)).word(to_string(c.subset));
  }
  w.key("weights").nums(model.weights);
  w.key("base_models").integer(model.base_models.size());
  for (const auto& [subset, learner] : model.base_models) {
    w.key("base").word(to_string(subset));
    write_learner(w, learner);
  }
  w.key("meta").integer(model.meta_model ? 1 : 0);
  if (model.meta_model) write_learner(w, *model.meta_model);
}

FusionModel read_fusion(Reader& r) {
  read_header(r, "creditboost-fusion");
  FusionModel m;
  try {
    m.strategy = parse_fusion_strategy(r.word("strategy"));
    const std::string target(r.word("target"));
    const auto n_cols = r.integer<std::size_t>("columns");
    std::vector<ColumnSpec> cols;
    for (std::size_t j = 0; j < n_cols; ++j) {
      const auto a = r.line("column", 3);
      cols.push_back({std::string(a[0]), parse_column_kind(a[1]), parse_subset(a[2])});
    }
    m.schema = Schema(std::move(cols), target);
    m.weights = r.nums("weights");
    const auto n_base = r.integer<std::size_t>("base_models");
    for (std::size_t b = 0; b < n_base; ++b) {
      const Subset s = parse_subset(r.word("base"));
      if (!m.base_models.emplace(s, read_learner(r)).second) r.fail("duplicate base model");
    }
  } catch (const InvalidArgument& e) {
    r.fail(e.what());
  }
  if (r.integer<int>("meta") == 1) m.meta_model = read_learner(r);
  return m;
}

void expect_done(const Reader& r) {
  if (!r.at_end()) r.fail("trailing content after model");
}

}  // namespace

std::string serialize(const BoostedModel& model) {
  Writer w;
  write_header(w, "creditboost-gbdt");
  write_gbdt_body(w, model);
  return w.finish();
}

std::string serialize(const FittedLearner& learner) {
  Writer w;
  write_header(w, "creditboost-learner");
  write_learner(w, learner);
  return w.finish();
}

std::string serialize(const FusionModel& model) {
  Writer w;
  write_fusion(w, model);
  return w.finish();
}

std::string serialize(const ScoringPipeline& pipeline) {
  Writer w;
  write_header(w, "creditboost-pipeline");
  const auto& st = pipeline.preprocess;
  w.key("clip_outliers").integer(st.config.clip_outliers ? 1 : 0);
  w.key("clip_lower").num(st.config.clip_lower);
  w.key("clip_upper").num(st.config.clip_upper);
  w.key("medians").nums(st.medians);
  w.key("clip_low").nums(st.clip_low);
  w.key("clip_high").nums(st.clip_high);
  write_fusion(w, pipeline.model);
  return w.finish();
}

BoostedModel deserialize_gbdt(std::string_view text) {
  Reader r(text);
  read_header(r, "creditboost-gbdt");
  auto m = read_gbdt_body(r);
  expect_done(r);
  return m;
}

FittedLearner deserialize_learner(std::string_view text) {
  Reader r(text);
  read_header(r, "creditboost-learner");
  auto l = read_learner(r);
  expect_done(r);
  return l;
}

FusionModel deserialize_fusion(std::string_view text) {
  Reader r(text);
  auto m = read_fusion(r);
  expect_done(r);
  return m;
}

ScoringPipeline deserialize_pipeline(std::string_view text) {
  Reader r(text);
  read_header(r, "creditboost-pipeline");
  ScoringPipeline p;
  auto& st = p.preprocess;
  st.config.clip_outliers = r.integer<int>("clip_outliers") != 0;
  st.config.clip_lower = r.num("clip_lower");
  st.config.clip_upper = r.num("clip_upper");
  st.medians = r.nums("medians");
  st.clip_low = r.nums("clip_low");
  st.clip_high = r.nums("clip_high");
  p.model = read_fusion(r);
  expect_done(r);
  if (st.medians.size() != p.model.schema.size()) {
    throw ParseError("preprocessing state does not match the model schema");
  }
  return p;
}

void save_pipeline(const std::filesystem::path& path, const ScoringPipeline& pipeline) {
  detail::write_file(path, serialize(pipeline));
}

ScoringPipeline load_pipeline(const std::filesystem::path& path) {
  return deserialize_pipeline(detail::read_file(path));
}

}  // namespace creditboost
