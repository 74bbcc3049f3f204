#include <doctest.h>

#include <cmath>

#include "logitval/metrics.hpp"
#include "logitval/rng.hpp"

using namespace logitval;
using metrics::MetricKind;
using metrics::PredictionSet;

namespace {

PredictionSet make_preds(std::initializer_list<double> probs,
                         std::initializer_list<double> outcomes) {
  PredictionSet p;
  p.probs = Eigen::VectorXd(static_cast<Eigen::Index>(probs.size()));
  p.outcomes = Eigen::VectorXd(static_cast<Eigen::Index>(outcomes.size()));
  Eigen::Index i = 0;
  for (double v : probs) p.probs[i++] = v;
  i = 0;
  for (double v : outcomes) p.outcomes[i++] = v;
  return p;
}

// Independent oracle: enumerate all event/non-event pairs.
double cstat_bruteforce(const PredictionSet& preds) {
  double sum = 0.0;
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < preds.size(); ++i) {
    if (preds.outcomes[i] != 1.0) continue;
    for (Eigen::Index j = 0; j < preds.size(); ++j) {
      if (preds.outcomes[j] != 0.0) continue;
      pairs += 1.0;
      if (preds.probs[i] > preds.probs[j])
        sum += 1.0;
      else if (preds.probs[i] == preds.probs[j])
        sum += 0.5;
    }
  }
  return sum / pairs;
}

// Random instance with both classes present; tie_grid > 0 snaps
// probabilities to multiples of 1/tie_grid so exact ties occur.
PredictionSet random_preds(Rng& rng, Eigen::Index max_n, int tie_grid) {
  for (;;) {
    const Eigen::Index n =
        2 + static_cast<Eigen::Index>(rng.uniform_index(max_n - 1));
    PredictionSet p;
    p.probs.resize(n);
    p.outcomes.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = rng.uniform01();
      if (tie_grid > 0) v = std::floor(v * tie_grid) / tie_grid;
      p.probs[i] = v;
      p.outcomes[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    }
    if (p.outcomes.sum() > 0.0 && p.outcomes.sum() < n) return p;
  }
}

}  // namespace

TEST_CASE("c-statistic on worked example") {
  const auto preds = make_preds({0.7, 0.3, 0.5, 0.1}, {1, 1, 0, 0});
  const auto value = metrics::c_statistic(preds);
  // 4 pairs: (0.7,0.5)+ (0.7,0.1)+ (0.3,0.5)- (0.3,0.1)+ -> 3/4
  CHECK(value.value == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(value.n_events == 2);
  CHECK(value.n_nonevents == 2);
}

TEST_CASE("c-statistic extremes") {
  CHECK(metrics::c_statistic(make_preds({0.4, 0.4, 0.4}, {1, 0, 0})).value ==
        0.5);
  CHECK(metrics::c_statistic(make_preds({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}))
            .value == 1.0);
}

TEST_CASE("c-statistic rejects single-class outcomes") {
  CHECK_THROWS_AS(metrics::c_statistic(make_preds({0.2, 0.4}, {1, 1})),
                  DegenerateOutcome);
  CHECK_THROWS_AS(metrics::c_statistic(make_preds({0.2, 0.4}, {0, 0})),
                  DegenerateOutcome);
}

TEST_CASE("sorted c-statistic equals pair enumeration exactly") {
  Rng rng(20240811);
  for (int trial = 0; trial < 1000; ++trial) {
    // Mix continuous and heavily tied instances.
    const int grid = trial % 3 == 0 ? 8 : (trial % 3 == 1 ? 0 : 4);
    const auto preds = random_preds(rng, 30, grid);
    const double fast = metrics::c_statistic(preds).value;
    const double brute = cstat_bruteforce(preds);
    CHECK(fast == brute);  // bit-identical, not approximately equal
  }
}

TEST_CASE("c-statistic invariant under strictly increasing transforms") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto preds = random_preds(rng, 25, trial % 2 == 0 ? 6 : 0);
    PredictionSet squashed = preds;
    for (Eigen::Index i = 0; i < squashed.size(); ++i)
      squashed.probs[i] = 1.0 / (1.0 + std::exp(-3.0 * squashed.probs[i]));
    CHECK(metrics::c_statistic(squashed).value ==
          metrics::c_statistic(preds).value);
  }
}

TEST_CASE("c-statistic symmetric under class and probability flips") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto preds = random_preds(rng, 25, trial % 2 == 0 ? 5 : 0);
    PredictionSet flipped = preds;
    flipped.probs = (1.0 - flipped.probs.array()).matrix();
    flipped.outcomes = (1.0 - flipped.outcomes.array()).matrix();
    CHECK(metrics::c_statistic(flipped).value ==
          metrics::c_statistic(preds).value);
  }
}

TEST_CASE("discrimination slope on worked example") {
  const auto preds = make_preds({0.7, 0.3, 0.5, 0.1}, {1, 1, 0, 0});
  CHECK(metrics::discrimination_slope(preds).value ==
        doctest::Approx(0.2).epsilon(1e-15));
  CHECK(metrics::discrimination_slope(make_preds({0.3, 0.3, 0.3}, {1, 0, 1}))
            .value == 0.0);
  CHECK(metrics::discrimination_slope(make_preds({1, 0, 1, 0}, {1, 0, 1, 0}))
            .value == 1.0);
}

TEST_CASE("Tjur identity: slope equals the mean pairwise difference") {
  Rng rng(123);

  SUBCASE("bit-exact on dyadic instances") {
    // Probabilities on a 1/1024 grid and power-of-two class sizes make both
    // routes exact in floating point, so the identity holds bitwise.
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::Index k = Eigen::Index{1} << rng.uniform_index(5);
      const Eigen::Index m = Eigen::Index{1} << rng.uniform_index(5);
      PredictionSet p;
      p.probs.resize(k + m);
      p.outcomes.resize(k + m);
      for (Eigen::Index i = 0; i < k + m; ++i) {
        p.probs[i] = std::floor(rng.uniform01() * 1024.0) / 1024.0;
        p.outcomes[i] = i < k ? 1.0 : 0.0;
      }
      double pair_sum = 0.0;
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = k; j < k + m; ++j)
          pair_sum += p.probs[i] - p.probs[j];
      const double pair_mean = pair_sum / static_cast<double>(k * m);
      CHECK(metrics::discrimination_slope(p).value == pair_mean);
    }
  }

  SUBCASE("machine precision on general instances") {
    for (int trial = 0; trial < 500; ++trial) {
      const auto p = random_preds(rng, 30, 0);
      double pair_sum = 0.0;
      double pairs = 0.0;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p.outcomes[i] != 1.0) continue;
        for (Eigen::Index j = 0; j < p.size(); ++j) {
          if (p.outcomes[j] != 0.0) continue;
          pair_sum += p.probs[i] - p.probs[j];
          pairs += 1.0;
        }
      }
      CHECK(metrics::discrimination_slope(p).value ==
            doctest::Approx(pair_sum / pairs).epsilon(1e-12));
    }
  }
}

TEST_CASE("Brier score basics") {
  CHECK(metrics::brier_score(make_preds({1, 0, 1}, {1, 0, 1})).value == 0.0);
  // non-informative predictions at the event rate
  CHECK(metrics::brier_score(make_preds({0.5, 0.5}, {1, 0})).value == 0.25);
  CHECK(metrics::brier_score(
            make_preds({0.25, 0.25, 0.25, 0.25}, {1, 0, 0, 0}))
            .value == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("Brier score is the mean of per-observation scores") {
  Rng rng(55);
  const auto p = random_preds(rng, 40, 0);
  double manual = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    PredictionSet single;
    single.probs = p.probs.segment(i, 1);
    single.outcomes = p.outcomes.segment(i, 1);
    manual += metrics::brier_score(single).value;
  }
  manual /= static_cast<double>(p.size());
  CHECK(metrics::brier_score(p).value ==
        doctest::Approx(manual).epsilon(1e-14));
}

TEST_CASE("winsorized c-statistic") {
  CHECK(metrics::winsorize_cstat(0.3) == 0.5);
  CHECK(metrics::winsorize_cstat(0.5) == 0.5);
  CHECK(metrics::winsorize_cstat(0.82) == 0.82);
}
