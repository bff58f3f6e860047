#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "creditboost/data.hpp"
#include "creditboost/errors.hpp"
#include "oracles.hpp"

using namespace creditboost;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_header(const Schema& s) {
  std::string h = "id";
  for (const auto& c : s.columns()) h += "," + c.name;
  return h + ",score\n";
}

std::string csv_row(const Schema& s, const std::string& id, double fill, double score) {
  std::string r = id;
  for (std::size_t j = 0; j < s.size(); ++j) r += "," + std::to_string(fill);
  return r + "," + std::to_string(score) + "\n";
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(CanonicalSchema, HasTwentyEightPredictorsAndScoreTarget) {
  const Schema s = canonical_schema();
  EXPECT_EQ(s.size(), 28u);
  EXPECT_EQ(s.target_name(), "score");
  EXPECT_FALSE(s.index_of("score"));
  EXPECT_FALSE(s.index_of("id"));
}

TEST(CanonicalSchema, TopUpAmountIsNumericConsumerCapacity) {
  const Schema s = canonical_schema();
  const auto& c = s[*s.index_of("top_up_amount")];
  EXPECT_EQ(c.kind, ColumnKind::kNumeric);
  EXPECT_EQ(c.subset, Subset::kConsumerCapacity);
}

TEST(CanonicalSchema, WandaFlagIsFlagLocationTrajectory) {
  const Schema s = canonical_schema();
  const auto& c = s[*s.index_of("wanda_flag")];
  EXPECT_EQ(c.kind, ColumnKind::kFlag);
  EXPECT_EQ(c.subset, Subset::kLocationTrajectory);
}

TEST(CanonicalSchema, SubsetMembership) {
  const Schema s = canonical_schema();
  const std::vector<std::string> consumer = {"top_up_month_diff", "top_up_amount",
                                             "recent_6month_avg_use", "total_account_fee",
                                             "curr_month_balance", "cost_sensitivity",
                                             "curr_overdue_flag"};
  const std::vector<std::string> location = {"recent_3month_shopping_count", "freq_shopping_flag",
                                             "wanda_flag", "sam_flag", "movie_flag", "tour_flag",
                                             "sport_flag"};
  const std::vector<std::string> app = {"online_shopping_count", "express_count",
                                        "finance_app_count", "video_app_count", "flight_count",
                                        "train_count", "tour_app_count"};
  const std::vector<std::string> other = {"age", "net_age_till_now", "connect_num",
                                          "true_name_flag", "uni_student_flag", "blk_list_flag",
                                          "4g_unhealth_flag"};
  EXPECT_EQ(subset_columns(s, Subset::kConsumerCapacity), consumer);
  EXPECT_EQ(subset_columns(s, Subset::kLocationTrajectory), location);
  EXPECT_EQ(subset_columns(s, Subset::kAppBehavior), app);
  EXPECT_EQ(subset_columns(s, Subset::kOther), other);
}

TEST(Schema, RejectsDuplicatesAndTargetCollision) {
  EXPECT_THROW(Schema({{"a"}, {"a"}}, "y"), InvalidArgument);
  EXPECT_THROW(Schema({{"a"}, {"y"}}, "y"), InvalidArgument);
}

TEST(SchemaText, RoundTripsCanonicalSchema) {
  const Schema s = canonical_schema();
  EXPECT_EQ(parse_schema(format_schema(s)), s);
}

TEST(SchemaText, ParsesCommentsAndTarget) {
  const Schema s = parse_schema("# test\ntarget = y\n\ncolumn = a numeric other\ncolumn = f flag app_behavior\n");
  EXPECT_EQ(s.target_name(), "y");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].kind, ColumnKind::kFlag);
  EXPECT_EQ(s[1].subset, Subset::kAppBehavior);
}

TEST(SchemaText, RejectsMalformedLines) {
  EXPECT_THROW(parse_schema("column a numeric other\n"), ParseError);
  EXPECT_THROW(parse_schema("column = a weird other\n"), ParseError);
  EXPECT_THROW(parse_schema("column = a numeric nowhere\n"), ParseError);
  EXPECT_THROW(parse_schema("colour = a numeric other\n"), ParseError);
  EXPECT_THROW(parse_schema("column = a numeric other\ncolumn = a count other\n"), ParseError);
}

TEST(Csv, LoadsThreeRows) {
  const Schema s = canonical_schema();
  std::string text = csv_header(s);
  for (int i = 0; i < 3; ++i) text += csv_row(s, "u" + std::to_string(i), i + 1, 600 + i);
  const Dataset d = parse_csv(text, s);
  EXPECT_EQ(d.n_rows, 3u);
  EXPECT_EQ(d.ids, (std::vector<std::string>{"u0", "u1", "u2"}));
  EXPECT_EQ(d.target, (std::vector<double>{600, 601, 602}));
  EXPECT_EQ(d.at(2, 5), 3.0);
}

TEST(Csv, AcceptsColumnsInAnyOrder) {
  const Schema s = numeric_schema({"a", "b"});
  const Dataset d = parse_csv("score,b,a\n1,2,3\n", s);
  EXPECT_EQ(d.at(0, 0), 3.0);
  EXPECT_EQ(d.at(0, 1), 2.0);
  EXPECT_EQ(d.target[0], 1.0);
}

TEST(Csv, MissingColumnIsSchemaError) {
  const Schema s = canonical_schema();
  std::string header = csv_header(s);
  header.replace(header.find(",age,"), 5, ",");
  try {
    parse_csv(header, s);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("age"), std::string::npos);
  }
}

TEST(Csv, UnknownColumnIsSchemaError) {
  EXPECT_THROW(parse_csv("a,b,zzz,score\n1,2,3,4\n", numeric_schema({"a", "b"})), SchemaError);
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  const Schema s = numeric_schema({"age", "b"});
  try {
    parse_csv("age,b,score\n1,2,3\nabc,2,3\n", s);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("age"), std::string::npos) << msg;
  }
}

TEST(Csv, EmptyCellIsNaN) {
  const Dataset d = parse_csv("a,score\n,1\n2,3\n", numeric_schema({"a"}));
  EXPECT_TRUE(std::isnan(d.at(0, 0)));
  EXPECT_EQ(d.at(1, 0), 2.0);
}

TEST(Csv, TargetOptionalWhenNotRequired) {
  const Dataset d = parse_csv("a\n1\n", numeric_schema({"a"}), {.require_target = false});
  EXPECT_FALSE(d.has_target());
  EXPECT_THROW(parse_csv("a\n1\n", numeric_schema({"a"})), SchemaError);
}

TEST(Csv, RaggedRowIsParseError) {
  EXPECT_THROW(parse_csv("a,score\n1\n", numeric_schema({"a"})), ParseError);
}

TEST(Csv, FormatRoundTripsExactly) {
  const Dataset d = generate_synthetic(50, 3);
  const Dataset back = parse_csv(format_csv(d), d.schema);
  EXPECT_EQ(back.values, d.values);
  EXPECT_EQ(back.target, d.target);
  EXPECT_EQ(back.ids, d.ids);
}

TEST(Csv, MissingFileIsIoError) {
  EXPECT_THROW(load_csv("/nonexistent/x.csv", canonical_schema()), IoError);
}

TEST(Preprocess, ImputesMedian) {
  const Dataset d = make_dataset(numeric_schema({"a"}), {{1}, {kNaN}, {3}}, {0, 0, 0});
  PreprocessStats stats;
  const Dataset p = preprocess(d, {}, &stats);
  EXPECT_EQ(std::vector<double>(p.column(0).begin(), p.column(0).end()),
            (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(stats.n_imputed, 1u);
}

TEST(Preprocess, CoercesFlags) {
  const Schema s({{"f", ColumnKind::kFlag, Subset::kOther}}, "score");
  const Dataset p = preprocess(make_dataset(s, {{0}, {2}, {1}}, {0, 0, 0}), {});
  EXPECT_EQ(std::vector<double>(p.column(0).begin(), p.column(0).end()),
            (std::vector<double>{0, 1, 1}));
}

TEST(Preprocess, ClipsOutlierToNinetyNinthPercentile) {
  std::vector<std::vector<double>> rows;
  std::vector<double> raw;
  for (int i = 0; i < 99; ++i) raw.push_back(10.0 + i);
  raw.push_back(1e6);
  for (double v : raw) rows.push_back({v});
  const Dataset d = make_dataset(numeric_schema({"a"}), rows, std::vector<double>(100, 0.0));
  PreprocessConfig cfg;
  cfg.clip_outliers = true;
  const Dataset p = preprocess(d, cfg);

  // Nearest-rank percentile computed directly: rank ceil(0.99 * 100) = 99.
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  const double p99 = sorted[98];
  const double p01 = sorted[0];
  EXPECT_EQ(p.at(99, 0), p99);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_GE(p.at(i, 0), p01);
    EXPECT_LE(p.at(i, 0), p99);
  }
}

TEST(Preprocess, AllMissingColumnThrows) {
  const Dataset d = make_dataset(numeric_schema({"a"}), {{kNaN}, {kNaN}}, {0, 0});
  EXPECT_THROW(preprocess(d, {}), InvalidArgument);
}

TEST(Preprocess, IsIdempotent) {
  Dataset d = generate_synthetic(300, 5);
  for (std::size_t i = 0; i < d.values.size(); i += 7) d.values[i] = kNaN;
  PreprocessConfig cfg;
  cfg.clip_outliers = true;
  const Dataset once = preprocess(d, cfg);
  const Dataset twice = preprocess(once, cfg);
  EXPECT_EQ(once.values, twice.values);
  EXPECT_TRUE(once.all_finite());
}

TEST(Preprocess, TestImputationUsesTrainingStatisticsOnly) {
  const Schema s = numeric_schema({"a"});
  const Dataset train = make_dataset(s, {{1}, {2}, {3}}, {0, 0, 0});
  const PreprocessState state = fit_preprocess(train, {});
  const Dataset test_a = make_dataset(s, {{kNaN}, {100}}, {0, 0});
  const Dataset test_b = make_dataset(s, {{kNaN}, {-500}}, {0, 0});
  EXPECT_EQ(apply_preprocess(test_a, state).at(0, 0), 2.0);
  EXPECT_EQ(apply_preprocess(test_b, state).at(0, 0), 2.0);
}

TEST(SplitSubsets, PartitionsCanonicalColumns) {
  const Dataset d = generate_synthetic(40, 1);
  const auto parts = split_subsets(d);
  ASSERT_EQ(parts.size(), 4u);
  std::size_t total = 0;
  std::set<std::string> seen;
  for (const auto& [subset, part] : parts) {
    total += part.n_cols();
    for (const auto& c : part.schema.columns()) {
      EXPECT_TRUE(seen.insert(c.name).second) << c.name << " appears twice";
      EXPECT_EQ(c.subset, subset);
    }
    EXPECT_EQ(part.target, d.target);
    EXPECT_EQ(part.ids, d.ids);
  }
  EXPECT_EQ(total, 28u);
  EXPECT_EQ(seen.size(), 28u);
}

TEST(SplitSubsets, FinanceAppCountOnlyInAppBehavior) {
  const auto parts = split_subsets(generate_synthetic(10, 1));
  for (const auto& [subset, part] : parts) {
    EXPECT_EQ(part.schema.index_of("finance_app_count").has_value(),
              subset == Subset::kAppBehavior);
  }
}

TEST(TrainTestSplit, SizesFollowCeilingRule) {
  const auto idx = train_test_indices(10, 0.2, 7);
  EXPECT_EQ(idx.train.size(), 8u);
  EXPECT_EQ(idx.test.size(), 2u);
  const auto odd = train_test_indices(11, 0.3, 7);
  EXPECT_EQ(odd.train.size(), 8u);  // ceil(11 * 0.7) = 8
}

TEST(TrainTestSplit, DisjointAndExhaustive) {
  const auto idx = train_test_indices(100, 0.25, 3);
  std::vector<std::size_t> all = idx.train;
  all.insert(all.end(), idx.test.begin(), idx.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(100);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(all, expect);
  EXPECT_TRUE(std::is_sorted(idx.train.begin(), idx.train.end()));
  EXPECT_TRUE(std::is_sorted(idx.test.begin(), idx.test.end()));
}

TEST(TrainTestSplit, DeterministicPerSeed) {
  EXPECT_EQ(train_test_indices(100, 0.2, 1).test, train_test_indices(100, 0.2, 1).test);
  EXPECT_NE(train_test_indices(100, 0.2, 1).test, train_test_indices(100, 0.2, 2).test);
}

TEST(TrainTestSplit, RejectsBadFraction) {
  EXPECT_THROW(train_test_indices(10, 0.0, 1), InvalidArgument);
  EXPECT_THROW(train_test_indices(10, 1.0, 1), InvalidArgument);
  EXPECT_THROW(train_test_indices(1, 0.5, 1), InvalidArgument);
}

TEST(TrainTestSplit, DatasetRowsMatchIndices) {
  const Dataset d = generate_synthetic(30, 2);
  const auto idx = train_test_indices(30, 0.2, 9);
  const auto [train, test] = train_test_split(d, 0.2, 9);
  ASSERT_EQ(test.n_rows, idx.test.size());
  for (std::size_t k = 0; k < idx.test.size(); ++k) {
    EXPECT_EQ(test.ids[k], d.ids[idx.test[k]]);
    EXPECT_EQ(test.target[k], d.target[idx.test[k]]);
  }
  EXPECT_EQ(train.n_rows + test.n_rows, d.n_rows);
}

TEST(Synthetic, DeterministicPerSeed) {
  const Dataset a = generate_synthetic(1000, 42);
  const Dataset b = generate_synthetic(1000, 42);
  const Dataset c = generate_synthetic(1000, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.target, b.target);
  EXPECT_NE(a.values, c.values);
}

TEST(Synthetic, FlagsAreBinaryAndValuesFinite) {
  const Dataset d = generate_synthetic(2000, 42);
  EXPECT_TRUE(d.all_finite());
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (d.schema[j].kind != ColumnKind::kFlag) continue;
    for (double v : d.column(j)) EXPECT_TRUE(v == 0.0 || v == 1.0) << d.schema[j].name;
  }
  for (double y : d.target) {
    EXPECT_GE(y, 350.0);
    EXPECT_LE(y, 720.0);
  }
}

TEST(Synthetic, TargetTracksPlantedSignal) {
  const Dataset d = generate_synthetic(10000, 42);
  EXPECT_GT(pearson(d.target, planted_signal(d)), 0.8);
}

TEST(Synthetic, PlantedSignalMatchesFormula) {
  const Dataset d = generate_synthetic(200, 8);
  const auto col = [&](const char* name) { return d.column(*d.schema.index_of(name)); };
  const double fin_median = oracle::median(
      std::vector<double>(col("finance_app_count").begin(), col("finance_app_count").end()));
  const auto signal = planted_signal(d);
  for (std::size_t i = 0; i < d.n_rows; ++i) {
    const double expect = 620 + 0.8 * col("net_age_till_now")[i] -
                          1.5 * col("top_up_month_diff")[i] +
                          0.05 * col("recent_6month_avg_use")[i] - 60 * col("blk_list_flag")[i] -
                          45 * col("curr_overdue_flag")[i] +
                          0.02 * col("total_account_fee")[i] * col("true_name_flag")[i] +
                          12 * (col("finance_app_count")[i] > fin_median ? 1 : 0) +
                          4 * std::sqrt(col("connect_num")[i]) +
                          2 * (col("movie_flag")[i] + col("tour_flag")[i] + col("sport_flag")[i]);
    EXPECT_NEAR(signal[i], expect, 1e-9 * std::fabs(expect));
  }
}

TEST(Dataset, SelectColumnsByNameReportsAllMissing) {
  const Dataset d = generate_synthetic(5, 1);
  const std::vector<std::string> names = {"age", "nope", "zilch"};
  try {
    d.select_columns(std::span<const std::string>(names));
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("nope"), std::string::npos);
    EXPECT_NE(msg.find("zilch"), std::string::npos);
  }
}
