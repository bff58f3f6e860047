#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "creditboost/errors.hpp"
#include "creditboost/pipeline.hpp"
#include "creditboost/serialization.hpp"

using namespace creditboost;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class Workdir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("creditboost_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  /// A fast experiment on 600 synthetic rows.
  ExperimentConfig small_config(const std::string& extra = "") const {
    return parse_config("data.synthetic.n = 600\n"
                        "learner.gbdt.num_iterations = 20\n"
                        "learner.forest.n_trees = 10\n"
                        "fusion.n_folds = 3\n"
                        "output.dir = " + dir_.string() + "\n" + extra);
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(CREDITBOOST_CLI) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, DefaultsCoverFourLearnersAndThreeStrategies) {
  const auto c = default_config();
  ASSERT_EQ(c.learners.size(), 4u);
  EXPECT_EQ(c.learners[0].kind(), LearnerKind::kLinearRegression);
  EXPECT_EQ(c.learners[3].kind(), LearnerKind::kGbdt);
  ASSERT_EQ(c.fusions.size(), 3u);
  EXPECT_EQ(c.fusions[2].strategy, FusionStrategy::kStacking);
  EXPECT_EQ(c.test_fraction, 0.2);
  EXPECT_EQ(c.synthetic_rows, 5000u);
}

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config("# experiment\n"
                              "seed = 7\n"
                              "learners = gbdt, linear_regression\n"
                              "learner.gbdt.num_leaves = 15\n"
                              "fusion.strategy = blending\n"
                              "fusion.holdout_fraction = 0.3\n"
                              "split.test_fraction = 0.25\n"
                              "preprocess.clip_outliers = true\n");
  EXPECT_EQ(c.seed, 7u);
  ASSERT_EQ(c.learners.size(), 2u);
  EXPECT_EQ(c.learners[0].kind(), LearnerKind::kGbdt);
  EXPECT_EQ(std::get<BoosterParams>(c.learners[0].params).num_leaves, 15);
  EXPECT_EQ(c.learners[0].seed, 7u);
  ASSERT_EQ(c.fusions.size(), 1u);
  EXPECT_EQ(c.fusions[0].strategy, FusionStrategy::kBlending);
  EXPECT_EQ(c.fusions[0].holdout_fraction, 0.3);
  EXPECT_EQ(c.test_fraction, 0.25);
  EXPECT_TRUE(c.preprocess.clip_outliers);
}

TEST(Config, ErrorsNameTheLine) {
  const auto expect_line = [](const std::string& text, const std::string& line) {
    try {
      parse_config(text);
      ADD_FAILURE() << "expected ParseError for: " << text;
    } catch (const ParseError& e) {
      EXPECT_NE(std::string(e.what()).find("line " + line), std::string::npos) << e.what();
    }
  };
  expect_line("seed = 1\nnonsense\n", "2");
  expect_line("bogus.key = 3\n", "1");
  expect_line("seed = 1\n\nseed =\n", "3");
  expect_line("learner.gbdt.num_leaves = many\n", "1");
  expect_line("learners = linear_regression, svm\n", "1");
}

TEST(Config, ValidationRejectsBadValues) {
  EXPECT_THROW(parse_config("split.test_fraction = 1.5\n").validate(), InvalidArgument);
  EXPECT_THROW(parse_config("learner.gbdt.num_leaves = 1\n").validate(), InvalidArgument);
}

TEST(Config, WithSeedReseedsEverything) {
  const auto c = default_config().with_seed(99);
  EXPECT_EQ(c.seed, 99u);
  for (const auto& l : c.learners) EXPECT_EQ(l.seed, 99u);
  EXPECT_EQ(c.fusion_base.seed, 99u);
  for (const auto& f : c.fusions) EXPECT_EQ(f.seed, 99u);
}

TEST_F(Workdir, GenerateWritesHeaderPlusRows) {
  cmd_generate(100, 42, path("a.csv"));
  cmd_generate(100, 42, path("b.csv"));
  const std::string a = slurp(path("a.csv"));
  EXPECT_EQ(count_lines(a), 101u);
  EXPECT_EQ(a, slurp(path("b.csv")));
  EXPECT_EQ(a.substr(0, 3), "id,");
  EXPECT_NE(a.substr(0, a.find('\n')).find(",score"), std::string::npos);
}

TEST_F(Workdir, GeneratedFileNeedsNoImputation) {
  cmd_generate(500, 7, path("g.csv"));
  PreprocessStats stats;
  const Dataset d = preprocess(load_csv(path("g.csv"), canonical_schema()), {}, &stats);
  EXPECT_EQ(d.n_rows, 500u);
  EXPECT_EQ(stats.n_imputed, 0u);
  EXPECT_EQ(stats.n_flags_coerced, 0u);
}

TEST_F(Workdir, GenerateIntoMissingDirectoryIsIoError) {
  EXPECT_THROW(cmd_generate(10, 1, path("missing/x.csv")), IoError);
}

TEST_F(Workdir, CompareBasesWritesSixteenRows) {
  const std::string table = cmd_compare_bases(small_config());
  EXPECT_EQ(count_lines(slurp(path("bases_all.csv"))), 17u);
  for (Subset s : kAllSubsets) {
    const auto stem = "bases_" + std::string(to_string(s));
    EXPECT_EQ(count_lines(slurp(path(stem + ".csv"))), 5u) << stem;
    EXPECT_TRUE(fs::exists(path(stem + ".txt")));
  }
  EXPECT_EQ(table, slurp(path("bases_all.txt")));
}

TEST_F(Workdir, CompareFusionWritesFiveRows) {
  cmd_compare_fusion(small_config());
  const std::string csv = slurp(path("fusion.csv"));
  EXPECT_EQ(count_lines(csv), 6u);
  EXPECT_NE(csv.find("All Features,GBDT,"), std::string::npos) << csv;
  for (const char* label : {"+ Voting", "+ Blending", "+ Stacking"}) {
    EXPECT_NE(csv.find(label), std::string::npos) << label;
  }
}

TEST_F(Workdir, CompareCommandsAreReproducible) {
  const auto c = small_config();
  const std::string first = cmd_compare_fusion(c);
  const std::string csv = slurp(path("fusion.csv"));
  EXPECT_EQ(cmd_compare_fusion(c), first);
  EXPECT_EQ(slurp(path("fusion.csv")), csv);
}

TEST_F(Workdir, MissingOutputDirectoryIsIoError) {
  auto c = small_config();
  c.output_dir = path("nope");
  EXPECT_THROW(cmd_compare_bases(c), IoError);
  EXPECT_THROW(cmd_compare_fusion(c), IoError);
  EXPECT_THROW(cmd_train(small_config("fusion.strategy = stacking\n"), path("nope/m.txt")),
               IoError);
}

TEST_F(Workdir, TrainNeedsExactlyOneStrategy) {
  EXPECT_THROW(cmd_train(small_config(), path("m.txt")), InvalidArgument);
}

TEST_F(Workdir, TrainThenPredictMatchesInMemoryModel) {
  const auto c = small_config("fusion.strategy = stacking\ndata.path = " +
                              path("data.csv").string() + "\n");
  cmd_generate(300, 5, path("data.csv"));
  const std::string summary = cmd_train(c, path("m.txt"));
  EXPECT_EQ(count_lines(summary), 6u);

  cmd_predict(path("m.txt"), path("data.csv"), path("scores.csv"));
  const std::string scores = slurp(path("scores.csv"));
  EXPECT_EQ(count_lines(scores), 301u);

  const auto pipeline = load_pipeline(path("m.txt"));
  const Dataset raw = load_csv(path("data.csv"), canonical_schema());
  const auto expect = predict_fusion(pipeline.model, apply_preprocess(raw, pipeline.preprocess));
  std::istringstream in(scores);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,score");
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    const auto comma = line.find(',');
    EXPECT_EQ(line.substr(0, comma), raw.ids[i]);
    const double v = std::stod(line.substr(comma + 1));
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(v, expect[i]) << "row " << i;
  }

  cmd_predict(path("m.txt"), path("data.csv"), path("scores2.csv"));
  EXPECT_EQ(slurp(path("scores2.csv")), scores);
}

TEST_F(Workdir, PredictWithoutTargetColumn) {
  cmd_generate(50, 6, path("data.csv"));
  cmd_train(small_config("fusion.strategy = voting\n"), path("m.txt"));
  std::string text = slurp(path("data.csv"));
  // Drop the trailing score column.
  std::string stripped;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) stripped += line.substr(0, line.rfind(',')) + "\n";
  std::ofstream(path("unlabeled.csv")) << stripped;
  cmd_predict(path("m.txt"), path("unlabeled.csv"), path("a.csv"));
  cmd_predict(path("m.txt"), path("data.csv"), path("b.csv"));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(count_lines(slurp(path("a.csv"))), 51u);
}

TEST_F(Workdir, PredictNamesMissingColumns) {
  cmd_generate(40, 6, path("data.csv"));
  cmd_train(small_config("fusion.strategy = voting\n"), path("m.txt"));
  const Dataset d = load_csv(path("data.csv"), canonical_schema());
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (d.schema[j].subset != Subset::kAppBehavior) keep.push_back(j);
  }
  write_csv(path("partial.csv"), d.select_columns(std::span<const std::size_t>(keep)));
  try {
    cmd_predict(path("m.txt"), path("partial.csv"), path("out.csv"));
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    for (const auto& name : subset_columns(d.schema, Subset::kAppBehavior)) {
      EXPECT_NE(msg.find(name), std::string::npos) << name << " not in: " << msg;
    }
  }
}

TEST_F(Workdir, BinaryRunsSubcommandsAndReportsErrors) {
  EXPECT_EQ(run("generate --rows 100 --seed 3 --out " + path("d.csv").string()), 0);
  EXPECT_EQ(count_lines(slurp(path("d.csv"))), 101u);

  std::ofstream(path("c.cfg")) << "data.synthetic.n = 400\nlearner.gbdt.num_iterations = 10\n"
                                  "learner.forest.n_trees = 5\nfusion.strategy = stacking\n"
                                  "fusion.n_folds = 2\n";
  EXPECT_EQ(run("--threads 2 compare-bases --config " + path("c.cfg").string() + " --out " +
                dir_.string()),
            0);
  EXPECT_EQ(count_lines(slurp(path("bases_all.csv"))), 17u);
  EXPECT_EQ(run("train --config " + path("c.cfg").string() + " --seed 9 --out " +
                path("m.txt").string()),
            0);
  EXPECT_EQ(run("predict --model " + path("m.txt").string() + " --data " + path("d.csv").string() +
                " --out " + path("s.csv").string()),
            0);
  EXPECT_EQ(count_lines(slurp(path("s.csv"))), 101u);

  EXPECT_EQ(run("compare-fusion --config " + path("c.cfg").string() + " --out " +
                path("absent").string()),
            1);
  EXPECT_NE(slurp(path("stderr.txt")).find("does not exist"), std::string::npos);
  std::ofstream(path("bad.cfg")) << "learner.gbdt.num_leaves = 4\nwhat = 1\n";
  EXPECT_EQ(run("compare-bases --config " + path("bad.cfg").string()), 1);
  EXPECT_NE(slurp(path("stderr.txt")).find("line 2"), std::string::npos);
  EXPECT_NE(run("frobnicate"), 0);
}
