// Synthetic operator records with a planted credit score.
//
// Marginal feature distributions are fixed per column. Several columns are
// modulated by a per-user profile (age, network tenure, monthly spend,
// blacklist status) so the feature groups carry correlated, partly
// non-monotone information about the score, as real subscriber data does.

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "creditboost/data.hpp"
#include "creditboost/errors.hpp"

namespace creditboost {

namespace {

constexpr double kNoiseSd = 15.0;
constexpr double kScoreMin = 350.0;
constexpr double kScoreMax = 720.0;

class ColumnIndex {
 public:
  explicit ColumnIndex(const Schema& schema) {
    for (std::size_t j = 0; j < schema.size(); ++j) index_[schema[j].name] = j;
  }
  std::size_t operator()(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw SchemaError("canonical column '" + name + "' not present");
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

/// Per-row generator state; draws are consumed in a fixed order.
class RowSampler {
 public:
  explicit RowSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform_int(int lo, int hi) {
    return static_cast<double>(std::uniform_int_distribution<int>(lo, hi)(rng_));
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double poisson(double mean) {
    return static_cast<double>(std::poisson_distribution<int>(mean)(rng_));
  }
  double bernoulli(double p) { return std::bernoulli_distribution(p)(rng_) ? 1.0 : 0.0; }
  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(rng_);
  }
  double lognormal(double m, double s) {
    return std::lognormal_distribution<double>(m, s)(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

std::vector<double> planted_signal(const Dataset& d) {
  const ColumnIndex col(d.schema);
  const auto c = [&](const char* name) { return d.column(col(name)); };
  const auto net_age = c("net_age_till_now");
  const auto top_up_diff = c("top_up_month_diff");
  const auto avg_use = c("recent_6month_avg_use");
  const auto blk = c("blk_list_flag");
  const auto overdue = c("curr_overdue_flag");
  const auto fee = c("total_account_fee");
  const auto true_name = c("true_name_flag");
  const auto finance = c("finance_app_count");
  const auto connect = c("connect_num");
  const auto movie = c("movie_flag");
  const auto tour = c("tour_flag");
  const auto sport = c("sport_flag");

  const double finance_median =
      median(std::vector<double>(finance.begin(), finance.end()));

  std::vector<double> out(d.n_rows);
  for (std::size_t i = 0; i < d.n_rows; ++i) {
    out[i] = 620.0 + 0.8 * net_age[i] - 1.5 * top_up_diff[i] + 0.05 * avg_use[i] -
             60.0 * blk[i] - 45.0 * overdue[i] + 0.02 * fee[i] * true_name[i] +
             12.0 * (finance[i] > finance_median ? 1.0 : 0.0) +
             4.0 * std::sqrt(connect[i]) + 2.0 * (movie[i] + tour[i] + sport[i]);
  }
  return out;
}

Dataset generate_synthetic(std::size_t n_rows, std::uint64_t seed) {
  if (n_rows < 1) throw InvalidArgument("generate_synthetic needs n_rows >= 1");
  Dataset d;
  d.schema = canonical_schema();
  d.n_rows = n_rows;
  d.values.assign(n_rows * d.n_cols(), 0.0);
  d.ids.reserve(n_rows);
  const ColumnIndex col(d.schema);
  const auto set = [&](const char* name, std::size_t row, double v) {
    d.column(col(name))[row] = v;
  };

  RowSampler s(seed);
  std::vector<double> noise(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    d.ids.push_back(std::to_string(i + 1));

    // Profile: age, tenure on the network (months), monthly spend level.
    const double age = s.uniform_int(18, 80);
    const int max_tenure = std::min(96, 12 * (static_cast<int>(age) - 16));
    const double tenure = s.uniform_int(1, max_tenure);
    const double spend = (25.0 + 110.0 * (1.0 - std::exp(-tenure / 30.0))) *
                         s.lognormal(0.0, 0.35);
    const bool young = age <= 24.0;
    const bool new_user = tenure < 12.0;

    // other
    set("age", i, age);
    set("net_age_till_now", i, tenure);
    set("connect_num", i, std::round(s.lognormal(3.6, 0.9)));
    set("true_name_flag", i, s.bernoulli(0.92));
    set("uni_student_flag", i, s.bernoulli(young ? 0.45 : 0.02));
    const double blk = s.bernoulli(new_user ? 0.10 : 0.03);
    set("blk_list_flag", i, blk);
    set("4g_unhealth_flag", i, s.bernoulli(0.12));

    // consumer_capacity
    set("top_up_month_diff", i, s.poisson(tenure < 18.0 ? 2.5 : 1.0));
    static constexpr double kTopUps[] = {10, 20, 30, 50, 100, 200};
    const int tier = std::clamp(static_cast<int>(spend / 30.0) +
                                    static_cast<int>(s.uniform_int(-1, 1)),
                                0, 5);
    set("top_up_amount", i, kTopUps[tier]);
    set("recent_6month_avg_use", i, round2(spend));
    set("total_account_fee", i, round2(spend * s.uniform(0.8, 1.25)));
    set("curr_month_balance", i, round2(s.lognormal(3.2, 0.8) + 0.2 * spend));
    set("cost_sensitivity", i,
        static_cast<double>(std::clamp(static_cast<int>(5.0 - spend / 40.0 +
                                                        s.normal(0.0, 0.8)),
                                       1, 5)));
    set("curr_overdue_flag", i, s.bernoulli(new_user ? 0.25 : 0.06));

    // location_trajectory
    // Mall visits peak around two years on the network.
    const double bump = std::exp(-std::pow((tenure - 24.0) / 14.0, 2.0));
    const double shopping = s.poisson(1.5 + 7.0 * bump);
    set("recent_3month_shopping_count", i, shopping);
    set("freq_shopping_flag", i, s.bernoulli(shopping >= 6.0 ? 0.8 : 0.1));
    set("wanda_flag", i, s.bernoulli(0.1 + 0.4 * bump));
    set("sam_flag", i, s.bernoulli(spend > 100.0 ? 0.2 : 0.08));
    set("movie_flag", i, s.bernoulli(0.3));
    const double tour = s.bernoulli(0.15);
    set("tour_flag", i, tour);
    set("sport_flag", i, s.bernoulli(0.2));

    // app_behavior
    // New users either shop online heavily or not at all; established users
    // sit in between.
    const double online_mean = tenure < 18.0 ? (s.bernoulli(0.5) > 0.0 ? 24.0 : 0.5) : 8.0;
    const double online = s.poisson(online_mean);
    set("online_shopping_count", i, online);
    set("express_count", i, s.poisson(0.6 * online + 1.0));
    set("finance_app_count", i, s.poisson(3.5));
    // Blacklisted users show anomalous video usage in either direction.
    const double video_mean = blk > 0.0 ? (s.bernoulli(0.5) > 0.0 ? 60.0 : 1.0)
                                        : (age < 30.0 ? 25.0 : 12.0);
    set("video_app_count", i, s.poisson(video_mean));
    set("flight_count", i, s.poisson(spend > 110.0 ? 1.5 : 0.2));
    set("train_count", i, s.poisson(1.2));
    set("tour_app_count", i, s.poisson(tour > 0.0 ? 3.0 : 0.8));

    noise[i] = s.normal(0.0, kNoiseSd);
  }

  const auto signal = planted_signal(d);
  d.target.resize(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    d.target[i] = std::clamp(signal[i] + noise[i], kScoreMin, kScoreMax);
  }
  return d;
}

}  // namespace creditboost
