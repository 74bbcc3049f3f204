#pragma once

#include <Eigen/Core>

#include "logitval/errors.hpp"

namespace logitval::metrics {

enum class MetricKind { CStatistic, DiscriminationSlope, BrierScore };

const char* metric_name(MetricKind kind);

/// True for metrics where larger values mean better discrimination or
/// accuracy; the Brier score is oriented the other way.
inline bool larger_is_better(MetricKind kind) {
  return kind != MetricKind::BrierScore;
}

/// c-statistic and discrimination slope compare events against non-events
/// and are undefined on single-class outcome vectors; the Brier score is
/// defined even for a single observation.
inline bool requires_both_classes(MetricKind kind) {
  return kind != MetricKind::BrierScore;
}

/// Predicted event probabilities paired with the observed binary outcomes.
struct PredictionSet {
  Eigen::VectorXd probs;
  Eigen::VectorXd outcomes;

  Eigen::Index size() const { return probs.size(); }
};

struct MetricValue {
  MetricKind kind;
  double value;
  Eigen::Index n_events;
  Eigen::Index n_nonevents;
};

/// Proportion of event/non-event pairs in which the event has the strictly
/// higher predicted probability; exact ties count 1/2 (this makes the value
/// equal the area under the ROC curve). Comparison is exact floating
/// equality, so results are deterministic. Throws DegenerateOutcome when the
/// outcomes are single-class.
MetricValue c_statistic(const PredictionSet& preds);

/// Mean predicted probability among events minus mean among non-events
/// (Tjur's coefficient of discrimination).
MetricValue discrimination_slope(const PredictionSet& preds);

/// Mean squared difference between outcome and predicted probability.
MetricValue brier_score(const PredictionSet& preds);

/// Replaces c-statistic values below 0.5 by 0.5.
inline double winsorize_cstat(double value) {
  return value < 0.5 ? 0.5 : value;
}

MetricValue evaluate(MetricKind kind, const PredictionSet& preds);

}  // namespace logitval::metrics
