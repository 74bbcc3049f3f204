#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "logitval/dataset.hpp"
#include "logitval/estimators.hpp"
#include "logitval/metrics.hpp"
#include "logitval/rng.hpp"

namespace logitval::resampling {

using metrics::MetricKind;

enum class Method {
  Apparent,
  LooCv,
  LpoCv,
  KfoldCv,
  EnhancedBootstrap,
  Dot632Plus,
  SimpleBootstrap,
};

const char* method_name(Method method);

struct ResamplePlan {
  Method method = Method::Apparent;
  int folds = 5;
  int repetitions = 40;
  int bootstrap_count = 200;
  std::uint64_t base_seed = 0;
  // When set, every fitting subset is additionally run through the
  // separation test and the count is reported (costs one LP per subset).
  bool count_separation = false;

  void validate() const;  // throws InvalidSpec
};

struct AssessmentResult {
  std::string estimator;
  Method method = Method::Apparent;
  MetricKind metric = MetricKind::CStatistic;
  // Corrected estimate. Apparent and enhanced-bootstrap values may fall
  // outside the metric's natural range; no clamping is applied here.
  double value = 0.0;
  long discarded_subsets = 0;
  long attempted_subsets = 0;
  long separated_subsets = -1;  // -1 when not tracked
};

/// Intermediate quantities of the .632+ computation.
struct Dot632Trace {
  double apparent = 0.0;
  double oob = 0.0;  // out-of-bag average, after the null-value clamp
  double r_hat = 0.0;
  double w_hat = 0.0;
  double null_value = 0.0;
};

/// A fitted model reduced to what resampling needs: predicted probabilities
/// for arbitrary covariate rows.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& X) const = 0;
};

/// Model-fitting strategy plugged into the resampling loops. Fits must be
/// pure functions of the training data so that resampled assessments are
/// reproducible.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Predictor> fit(const Dataset& data) const = 0;
};

/// Logistic-regression estimators (ML, Firth, ridge with per-fit penalty
/// tuning) behind the Estimator interface.
class GlmEstimator final : public Estimator {
 public:
  explicit GlmEstimator(glm::EstimatorSpec spec) : spec_(std::move(spec)) {}
  std::string name() const override {
    return glm::estimator_name(spec_.kind);
  }
  std::unique_ptr<Predictor> fit(const Dataset& data) const override;
  const glm::EstimatorSpec& spec() const { return spec_; }

 private:
  glm::EstimatorSpec spec_;
};

enum class SubsetDecision { Ok, DiscardCollinear, DiscardOneClassTraining,
                            DiscardOneClassEvaluation };

/// Degenerate-subset policy applied to every resampled fit/evaluation pair:
/// discard when the fitting subset has exactly collinear covariates (e.g. a
/// binary covariate constant in the subset), when its outcome is single
/// class, or when the evaluation outcome is single class and the metric
/// needs both classes. Separated-but-fittable subsets are NOT discarded;
/// those fits proceed under the iteration-cap rule.
SubsetDecision subset_policy(const Dataset& fit_subset,
                             const Dataset& eval_subset, MetricKind metric);

/// Apparent estimate: fit once, evaluate the metric on the training data.
AssessmentResult apparent(const Dataset& data, const Estimator& estimator,
                          MetricKind metric);

/// Leave-one-out CV. The n left-out predictions are pooled and the
/// c-statistic / discrimination slope computed once from the pooled vector;
/// the Brier score averages per-observation squared errors (identical to
/// pooling for that metric).
AssessmentResult loo_cv(const Dataset& data, const Estimator& estimator,
                        MetricKind metric, const ResamplePlan& plan = {});

/// Leave-pair-out CV over all k(n-k) contrary-outcome pairs. Supports the
/// c-statistic (ties count 1/2) and the discrimination slope; the Brier
/// score is refused because its value depends on the event rate of the
/// evaluation pairs.
AssessmentResult lpo_cv(const Dataset& data, const Estimator& estimator,
                        MetricKind metric, const ResamplePlan& plan = {});

/// One repetition of f-fold CV with the given permutation seed: metric
/// evaluated within each left-out fold, averaged over valid folds.
/// Returns the repetition mean plus fold bookkeeping.
struct KfoldRep {
  double value = 0.0;
  int valid_folds = 0;
  int discarded_folds = 0;
  int separated_folds = -1;
};
KfoldRep kfold_single_rep(const Dataset& data, const Estimator& estimator,
                          MetricKind metric, int folds, std::uint64_t seed,
                          bool count_separation = false);

/// Repeated f-fold CV: folds are a uniform random partition (not stratified),
/// the per-repetition fold means are averaged, then repetitions are averaged.
AssessmentResult kfold_cv(const Dataset& data, const Estimator& estimator,
                          MetricKind metric, const ResamplePlan& plan);

/// Enhanced bootstrap: apparent minus the optimism estimate
/// mean(metric on resample) - mean(metric on original data) over valid
/// resamples, models fitted on the resamples.
AssessmentResult enhanced_bootstrap(const Dataset& data,
                                    const Estimator& estimator,
                                    MetricKind metric,
                                    const ResamplePlan& plan);

/// .632+ bootstrap: weighted average of the apparent value and the
/// out-of-bag average, weight driven by the relative overfitting rate.
std::pair<AssessmentResult, Dot632Trace> dot632plus(const Dataset& data,
                                                    const Estimator& estimator,
                                                    MetricKind metric,
                                                    const ResamplePlan& plan);

/// Simple bootstrap: average metric of resample-fitted models applied to the
/// original data. Known to be anti-conservative; provided for comparison.
AssessmentResult simple_bootstrap(const Dataset& data,
                                  const Estimator& estimator,
                                  MetricKind metric,
                                  const ResamplePlan& plan);

/// Dispatch on plan.method (Dot632Plus discards the trace).
AssessmentResult assess(const Dataset& data, const Estimator& estimator,
                        MetricKind metric, const ResamplePlan& plan);

/// Pure .632+ combination rule; exposed for direct verification.
///   clamp the out-of-bag value at null_value,
///   R = (app - oob) / (app - null), zeroed when oob beats app or app fails
///   to beat null, w = 0.632 / (1 - 0.368 R), result = (1-w) app + w oob.
/// Orientation flips for smaller-is-better metrics.
std::pair<double, Dot632Trace> dot632plus_combine(double apparent_value,
                                                  double oob_value,
                                                  double null_value,
                                                  bool larger_is_better);

/// Enhanced-bootstrap combination rule.
inline double enhanced_corrected(double apparent_value, double mean_boot,
                                 double mean_orig) {
  return apparent_value - (mean_boot - mean_orig);
}

/// No-information Brier score of a prediction set: the average squared error
/// when every outcome is paired with every prediction,
/// (1/n^2) sum_i sum_j (y_i - p_j)^2. Used as the .632+ null value for the
/// Brier score.
double brier_noinfo(const metrics::PredictionSet& preds);

/// Null value ("no information" reference) used by the .632+ clamps:
/// 0.5 for the c-statistic, 0 for the discrimination slope, brier_noinfo of
/// the apparent predictions for the Brier score.
double dot632_null_value(MetricKind metric,
                         const metrics::PredictionSet& apparent_preds);

/// Re-export of the seed-derivation helper under its resampling role.
inline std::uint64_t derive_subset_seed(std::uint64_t base_seed,
                                        std::string_view method_tag,
                                        std::uint64_t index) {
  return derive_seed(base_seed, method_tag, index);
}

}  // namespace logitval::resampling
