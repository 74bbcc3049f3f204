#include <doctest.h>

#include <cmath>

#include "logitval/simstudy.hpp"

using namespace logitval;
using metrics::MetricKind;
using resampling::Method;
using simstudy::ScenarioConfig;
using simstudy::StudyGrid;

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum();
  const double va = (a.array() - ma).square().sum();
  const double vb = (b.array() - mb).square().sum();
  return cov / std::sqrt(va * vb);
}

ScenarioConfig small_scenario() {
  ScenarioConfig s;
  s.n = 50;
  s.event_rate = 0.5;
  s.effect_multiplier = 1.0;
  s.n_replicates = 6;
  s.validation_size = 2000;
  s.base_seed = 99;
  return s;
}

}  // namespace

TEST_CASE("covariate generator reproduces the design marginals") {
  Rng rng(100);
  const Eigen::Index n = 1000000;
  const Eigen::MatrixXd X = simstudy::gen_covariates(n, rng);

  const double p_x1 = (X.col(0).array() == 1.0).cast<double>().mean();
  CHECK(p_x1 == doctest::Approx(0.72575).epsilon(0.004));  // Phi(0.6)

  const double p_x2_0 = (X.col(1).array() == 0.0).cast<double>().mean();
  const double p_x2_2 = (X.col(1).array() == 2.0).cast<double>().mean();
  CHECK(p_x2_0 == doctest::Approx(0.11507).epsilon(0.02));  // Phi(-1.2)
  CHECK(p_x2_2 == doctest::Approx(0.22663).epsilon(0.01));  // 1 - Phi(0.75)

  // x3 is built from 10 z3 + 55, so its mean sits near 54.5 after
  // truncation toward zero.
  CHECK(X.col(2).mean() == doctest::Approx(54.5).epsilon(0.01));

  CHECK(pearson(X.col(0), X.col(2)) == doctest::Approx(-0.6).epsilon(0.04));
  CHECK(pearson(X.col(3), X.col(4)) == doctest::Approx(0.4).epsilon(0.08));
  CHECK(pearson(X.col(1), X.col(3)) == doctest::Approx(-0.4).epsilon(0.08));
}

TEST_CASE("continuous covariates are winsorized at Q3 + 5 IQR") {
  Rng rng(200);
  const Eigen::MatrixXd X = simstudy::gen_covariates(20000, rng);
  for (Eigen::Index j = 2; j < 5; ++j) {
    std::vector<double> v(X.col(j).data(), X.col(j).data() + X.rows());
    std::sort(v.begin(), v.end());
    auto quart = [&](double p) {
      const double h = (v.size() - 1.0) * p;
      const std::size_t lo = static_cast<std::size_t>(h);
      return v[lo] + (h - lo) * (v[std::min(lo + 1, v.size() - 1)] - v[lo]);
    };
    const double cap = quart(0.75) + 5.0 * (quart(0.75) - quart(0.25));
    CHECK(X.col(j).maxCoeff() <= cap + 1e-9);
  }
  // The exponential tails of x4/x5 make the cap bind with 20k draws.
  CHECK((X.col(3).array() == X.col(3).maxCoeff()).cast<double>().sum() > 1.0);
}

TEST_CASE("intercept calibration") {
  SUBCASE("null slopes give the analytic logit") {
    const Eigen::VectorXd null_slopes = simstudy::slopes_for_effect(0.0);
    CHECK(simstudy::calibrate_intercept(null_slopes, 0.25) ==
          doctest::Approx(std::log(0.25 / 0.75)).epsilon(5e-3));
    CHECK(simstudy::calibrate_intercept(null_slopes, 0.5) ==
          doctest::Approx(0.0).epsilon(5e-3));
  }
  SUBCASE("strong slopes hit the target rate on fresh draws") {
    const Eigen::VectorXd strong = simstudy::slopes_for_effect(1.0);
    const double beta0 = simstudy::calibrate_intercept(strong, 0.25);
    Rng rng(4321);
    const Eigen::MatrixXd X = simstudy::gen_covariates(1000000, rng);
    const Eigen::VectorXd eta = (X * strong).array() + beta0;
    double rate = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
      rate += glm::sigmoid(eta[i]);
    rate /= static_cast<double>(eta.size());
    CHECK(rate == doctest::Approx(0.25).epsilon(0.01));
  }
}

TEST_CASE("dataset generation is deterministic and hits the event rate") {
  ScenarioConfig scenario;
  scenario.n = 50;
  scenario.event_rate = 0.25;
  scenario.effect_multiplier = 0.5;
  scenario.base_seed = 777;

  const Dataset a = simstudy::gen_dataset(scenario, 3);
  const Dataset b = simstudy::gen_dataset(scenario, 3);
  CHECK(a.y == b.y);
  CHECK(a.X == b.X);
  const Dataset c = simstudy::gen_dataset(scenario, 4);
  CHECK(a.y != c.y);

  double events = 0.0;
  const int reps = 400;
  for (int s = 0; s < reps; ++s)
    events += simstudy::gen_dataset(scenario, s).y.sum();
  const double mean_events = events / reps;
  // 3-sigma binomial band around n * rate
  const double band =
      3.0 * std::sqrt(50.0 * 0.25 * 0.75 / static_cast<double>(reps));
  CHECK(std::abs(mean_events - 12.5) <= band + 0.05);
}

TEST_CASE("separation frequency in the harshest scenario is near 18 percent") {
  ScenarioConfig scenario;
  scenario.n = 50;
  scenario.event_rate = 0.25;
  scenario.effect_multiplier = 1.0;
  scenario.base_seed = 1234;
  int separated = 0;
  const int reps = 300;
  for (int s = 0; s < reps; ++s) {
    const Dataset data = simstudy::gen_dataset(scenario, s);
    if (glm::detect_separation(data) == glm::SeparationStatus::Separated)
      ++separated;
  }
  const double rate = static_cast<double>(separated) / reps;
  CHECK(rate > 0.10);
  CHECK(rate < 0.27);
}

TEST_CASE("independent validation of a null fit sits at chance level") {
  ScenarioConfig scenario;
  scenario.n = 100;
  scenario.event_rate = 0.5;
  scenario.effect_multiplier = 0.0;
  scenario.validation_size = 50000;
  scenario.base_seed = 31;

  const Dataset data = simstudy::gen_dataset(scenario, 0);
  const auto fit = glm::fit_ml(data, glm::EstimatorSpec::ml());
  Rng rng(derive_seed(scenario.base_seed, "iv", 0));
  const auto iv = simstudy::independent_validation(fit, scenario, rng);
  CHECK(iv.c_statistic == doctest::Approx(0.5).epsilon(0.04));
  CHECK(iv.brier >= 0.25);  // overfitting cannot beat the null Brier
  CHECK(iv.brier < 0.30);
  CHECK(std::abs(iv.discrimination_slope) < 0.02);
}

TEST_CASE("summary statistics") {
  SUBCASE("constant differences") {
    const std::vector<double> b{0.6, 0.7, 0.8};
    const std::vector<double> iv{0.5, 0.6, 0.7};
    const auto s = simstudy::summarize(b, iv);
    CHECK(s.mean_diff == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.rmsd == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.mcse_mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.mcse_rmsd == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("hand-worked pair") {
    const std::vector<double> b{0.1, -0.1};
    const std::vector<double> iv{0.0, 0.0};
    const auto s = simstudy::summarize(b, iv);
    CHECK(s.mean_diff == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.rmsd == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("jackknife RMSD error matches brute-force recomputation") {
    const std::vector<double> b{0.1, -0.1, 0.2};
    const std::vector<double> iv{0.0, 0.0, 0.0};
    const auto s = simstudy::summarize(b, iv);
    std::vector<double> loo;
    for (std::size_t i = 0; i < b.size(); ++i) {
      double sq = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j)
        if (j != i) sq += b[j] * b[j];
      loo.push_back(std::sqrt(sq / 2.0));
    }
    const double mean = (loo[0] + loo[1] + loo[2]) / 3.0;
    double jack = 0.0;
    for (const double v : loo) jack += (v - mean) * (v - mean);
    const double brute = std::sqrt(2.0 / 3.0 * jack);
    CHECK(s.mcse_rmsd == doctest::Approx(brute).epsilon(1e-12));
  }
  SUBCASE("needs two replicates") {
    const std::vector<double> one{0.5};
    CHECK_THROWS_AS(simstudy::summarize(one, one), InsufficientReplicates);
  }
  SUBCASE("RMSD dominates the absolute mean difference") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> b(20), iv(20);
      for (int i = 0; i < 20; ++i) {
        b[i] = rng.normal();
        iv[i] = rng.normal();
      }
      const auto s = simstudy::summarize(b, iv);
      CHECK(s.rmsd >= std::abs(s.mean_diff) - 1e-12);
    }
  }
}

TEST_CASE("winsorized summaries floor the resampled values only") {
  std::vector<simstudy::ReplicateRecord> records(3);
  const double b[] = {0.4, 0.6, 0.45};
  const double iv[] = {0.5, 0.55, 0.42};
  for (int i = 0; i < 3; ++i) {
    records[i].metric = MetricKind::CStatistic;
    records[i].resampled = b[i];
    records[i].iv_value = iv[i];
  }
  const auto plain = simstudy::summarize(records);
  const auto wins = simstudy::winsorized_summary(records);
  const std::vector<double> floored{0.5, 0.6, 0.5};
  const std::vector<double> ivs{0.5, 0.55, 0.42};
  const auto expected = simstudy::summarize(floored, ivs);
  CHECK(wins.mean_diff == doctest::Approx(expected.mean_diff).epsilon(1e-12));
  CHECK(wins.rmsd == doctest::Approx(expected.rmsd).epsilon(1e-12));
  CHECK(plain.mean_diff < wins.mean_diff);

  // Values already above the floor are untouched.
  for (int i = 0; i < 3; ++i) records[i].resampled = 0.6 + 0.05 * i;
  const auto same = simstudy::summarize(records);
  const auto same_w = simstudy::winsorized_summary(records);
  CHECK(same.mean_diff == same_w.mean_diff);
  CHECK(same.rmsd == same_w.rmsd);

  records[0].metric = MetricKind::BrierScore;
  CHECK_THROWS_AS(simstudy::winsorized_summary(records), InvalidSpec);
}

TEST_CASE("run_scenario bookkeeping and determinism across workers") {
  const ScenarioConfig scenario = small_scenario();
  StudyGrid grid;
  grid.estimators = {glm::EstimatorKind::Ml, glm::EstimatorKind::Firth};
  grid.methods = {Method::Apparent, Method::LooCv, Method::LpoCv,
                  Method::KfoldCv};
  grid.metrics = {MetricKind::CStatistic, MetricKind::BrierScore};
  grid.repetitions = 2;

  const auto serial = simstudy::run_scenario(scenario, grid, 1);
  // cells: 2 estimators x (4 methods x 2 metrics - 1 skipped LPO x Brier)
  CHECK(serial.size() == 6u * 2u * 7u);

  const auto parallel = simstudy::run_scenario(scenario, grid, 4);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].replicate == parallel[i].replicate);
    CHECK(serial[i].estimator == parallel[i].estimator);
    CHECK(serial[i].method == parallel[i].method);
    CHECK(serial[i].metric == parallel[i].metric);
    CHECK(serial[i].resampled.has_value() == parallel[i].resampled.has_value());
    if (serial[i].resampled)
      CHECK(*serial[i].resampled == *parallel[i].resampled);  // bitwise
    CHECK(serial[i].iv_value == parallel[i].iv_value);
    CHECK(serial[i].discarded_subsets == parallel[i].discarded_subsets);
  }

  // No LPO x Brier cells were emitted.
  for (const auto& rec : serial) {
    CHECK_FALSE((rec.method == Method::LpoCv &&
                 rec.metric == MetricKind::BrierScore));
    CHECK(rec.attempted_subsets >= 0);
  }
}

TEST_CASE("scenario seeds depend on parameters, not position") {
  const auto a = simstudy::scenario_seed(5, 50, 0.25, 1.0);
  CHECK(a == simstudy::scenario_seed(5, 50, 0.25, 1.0));
  CHECK(a != simstudy::scenario_seed(5, 100, 0.25, 1.0));
  CHECK(a != simstudy::scenario_seed(5, 50, 0.5, 1.0));
  CHECK(a != simstudy::scenario_seed(5, 50, 0.25, 0.5));
  CHECK(a != simstudy::scenario_seed(6, 50, 0.25, 1.0));
}
