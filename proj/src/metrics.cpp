#include "logitval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace logitval::metrics {

namespace {

struct ClassCounts {
  Eigen::Index events = 0;
  Eigen::Index nonevents = 0;
};

ClassCounts count_classes(const PredictionSet& preds) {
  ClassCounts c;
  for (Eigen::Index i = 0; i < preds.size(); ++i) {
    if (preds.outcomes[i] == 1.0)
      ++c.events;
    else
      ++c.nonevents;
  }
  return c;
}

void check_preds(const PredictionSet& preds) {
  if (preds.probs.size() != preds.outcomes.size())
    throw DegenerateOutcome("prediction/outcome length mismatch");
  if (preds.size() == 0) throw DegenerateOutcome("empty prediction set");
}

}  // namespace

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::CStatistic: return "cstat";
    case MetricKind::DiscriminationSlope: return "slope";
    case MetricKind::BrierScore: return "brier";
  }
  return "?";
}

MetricValue c_statistic(const PredictionSet& preds) {
  check_preds(preds);
  const auto counts = count_classes(preds);
  if (counts.events == 0 || counts.nonevents == 0)
    throw DegenerateOutcome("c-statistic needs both outcome classes");

  const Eigen::Index n = preds.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return preds.probs[a] < preds.probs[b];
  });

  // Walk tie groups in ascending probability order; an event beats every
  // non-event strictly below its group and half-counts ties in its group.
  // All intermediate quantities are integer counts, so this is exactly the
  // pair-enumeration value.
  double numerator = 0.0;
  double nonevents_below = 0.0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    double group_events = 0.0;
    double group_nonevents = 0.0;
    while (j < n && preds.probs[order[j]] == preds.probs[order[i]]) {
      if (preds.outcomes[order[j]] == 1.0)
        group_events += 1.0;
      else
        group_nonevents += 1.0;
      ++j;
    }
    numerator += group_events * nonevents_below;
    numerator += 0.5 * group_events * group_nonevents;
    nonevents_below += group_nonevents;
    i = j;
  }
  const double pairs =
      static_cast<double>(counts.events) * static_cast<double>(counts.nonevents);
  return {MetricKind::CStatistic, numerator / pairs, counts.events,
          counts.nonevents};
}

MetricValue discrimination_slope(const PredictionSet& preds) {
  check_preds(preds);
  const auto counts = count_classes(preds);
  if (counts.events == 0 || counts.nonevents == 0)
    throw DegenerateOutcome("discrimination slope needs both outcome classes");
  double sum_events = 0.0;
  double sum_nonevents = 0.0;
  for (Eigen::Index i = 0; i < preds.size(); ++i) {
    if (preds.outcomes[i] == 1.0)
      sum_events += preds.probs[i];
    else
      sum_nonevents += preds.probs[i];
  }
  const double value = sum_events / static_cast<double>(counts.events) -
                       sum_nonevents / static_cast<double>(counts.nonevents);
  return {MetricKind::DiscriminationSlope, value, counts.events,
          counts.nonevents};
}

MetricValue brier_score(const PredictionSet& preds) {
  check_preds(preds);
  const auto counts = count_classes(preds);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < preds.size(); ++i) {
    const double d = preds.outcomes[i] - preds.probs[i];
    sum += d * d;
  }
  return {MetricKind::BrierScore, sum / static_cast<double>(preds.size()),
          counts.events, counts.nonevents};
}

MetricValue evaluate(MetricKind kind, const PredictionSet& preds) {
  switch (kind) {
    case MetricKind::CStatistic: return c_statistic(preds);
    case MetricKind::DiscriminationSlope: return discrimination_slope(preds);
    case MetricKind::BrierScore: return brier_score(preds);
  }
  throw Error("unknown metric");
}

}  // namespace logitval::metrics
