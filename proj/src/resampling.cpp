#include "logitval/resampling.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace logitval::resampling {

namespace {

using glm::EstimatorKind;
using metrics::PredictionSet;

class GlmPredictor final : public Predictor {
 public:
  explicit GlmPredictor(glm::FittedModel model) : model_(std::move(model)) {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const override {
    return glm::predict_probs(model_, X);
  }
  const glm::FittedModel& model() const { return model_; }

 private:
  glm::FittedModel model_;
};

bool single_class(const Eigen::VectorXd& y) {
  if (y.size() == 0) return true;
  const double first = y[0];
  for (Eigen::Index i = 1; i < y.size(); ++i)
    if (y[i] != first) return false;
  return true;
}

bool design_collinear(const Dataset& subset) {
  Eigen::MatrixXd A(subset.n(), subset.p() + 1);
  A.col(0).setOnes();
  A.rightCols(subset.p()) = subset.X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  return qr.rank() < A.cols();
}

// Training-side checks (a) and (b) of the degenerate-subset policy.
SubsetDecision training_decision(const Dataset& fit_subset) {
  if (single_class(fit_subset.y))
    return SubsetDecision::DiscardOneClassTraining;
  if (design_collinear(fit_subset)) return SubsetDecision::DiscardCollinear;
  return SubsetDecision::Ok;
}

PredictionSet predict_set(const Predictor& predictor, const Dataset& data) {
  return PredictionSet{predictor.predict(data.X), data.y};
}

std::vector<Eigen::Index> all_but(Eigen::Index n,
                                  std::initializer_list<Eigen::Index> drop) {
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::find(drop.begin(), drop.end(), i) == drop.end())
      idx.push_back(i);
  return idx;
}

std::vector<Eigen::Index> bootstrap_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (auto& v : idx)
    v = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
  return idx;
}

AssessmentResult make_result(const Estimator& estimator, Method method,
                             MetricKind metric) {
  AssessmentResult r;
  r.estimator = estimator.name();
  r.method = method;
  r.metric = metric;
  return r;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::Apparent: return "apparent";
    case Method::LooCv: return "loo";
    case Method::LpoCv: return "lpo";
    case Method::KfoldCv: return "kfold";
    case Method::EnhancedBootstrap: return "enhboot";
    case Method::Dot632Plus: return "632plus";
    case Method::SimpleBootstrap: return "simpleboot";
  }
  return "?";
}

void ResamplePlan::validate() const {
  if (folds < 2) throw InvalidSpec("folds must be at least 2");
  if (repetitions < 1) throw InvalidSpec("repetitions must be at least 1");
  if (bootstrap_count < 1)
    throw InvalidSpec("bootstrap_count must be at least 1");
}

std::unique_ptr<Predictor> GlmEstimator::fit(const Dataset& data) const {
  return std::make_unique<GlmPredictor>(glm::fit_glm(data, spec_));
}

SubsetDecision subset_policy(const Dataset& fit_subset,
                             const Dataset& eval_subset, MetricKind metric) {
  if (design_collinear(fit_subset)) return SubsetDecision::DiscardCollinear;
  if (single_class(fit_subset.y))
    return SubsetDecision::DiscardOneClassTraining;
  if (metrics::requires_both_classes(metric) && single_class(eval_subset.y))
    return SubsetDecision::DiscardOneClassEvaluation;
  return SubsetDecision::Ok;
}

AssessmentResult apparent(const Dataset& data, const Estimator& estimator,
                          MetricKind metric) {
  AssessmentResult r = make_result(estimator, Method::Apparent, metric);
  const auto predictor = estimator.fit(data);
  r.value = metrics::evaluate(metric, predict_set(*predictor, data)).value;
  r.attempted_subsets = 1;
  return r;
}

AssessmentResult loo_cv(const Dataset& data, const Estimator& estimator,
                        MetricKind metric, const ResamplePlan& plan) {
  const Eigen::Index n = data.n();
  if (n < 3) throw InvalidSpec("leave-one-out requires at least 3 observations");
  AssessmentResult r = make_result(estimator, Method::LooCv, metric);
  r.attempted_subsets = n;
  if (plan.count_separation) r.separated_subsets = 0;

  std::vector<double> pooled_probs;
  std::vector<double> pooled_outcomes;
  pooled_probs.reserve(static_cast<std::size_t>(n));
  pooled_outcomes.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = all_but(n, {i});
    const Dataset train = data.rows(idx);
    if (training_decision(train) != SubsetDecision::Ok) {
      ++r.discarded_subsets;
      continue;
    }
    if (plan.count_separation &&
        glm::detect_separation(train) == glm::SeparationStatus::Separated)
      ++r.separated_subsets;
    const auto predictor = estimator.fit(train);
    pooled_probs.push_back(predictor->predict(data.X.row(i))[0]);
    pooled_outcomes.push_back(data.y[i]);
  }
  if (pooled_probs.empty())
    throw AllSubsetsDiscarded("every leave-one-out subset was discarded");

  PredictionSet pooled{
      Eigen::Map<const Eigen::VectorXd>(pooled_probs.data(),
                                        static_cast<Eigen::Index>(pooled_probs.size())),
      Eigen::Map<const Eigen::VectorXd>(pooled_outcomes.data(),
                                        static_cast<Eigen::Index>(pooled_outcomes.size()))};
  // Pooling: c-statistic and slope are computed once on the pooled vector;
  // the Brier score is the mean of per-observation squared errors, which is
  // the same computation.
  r.value = metrics::evaluate(metric, pooled).value;
  return r;
}

AssessmentResult lpo_cv(const Dataset& data, const Estimator& estimator,
                        MetricKind metric, const ResamplePlan& plan) {
  if (metric == MetricKind::BrierScore)
    throw BrierNotSupported(
        "leave-pair-out is not applied to the Brier score: pair averages "
        "depend on the event rate");
  const Eigen::Index n = data.n();
  std::vector<Eigen::Index> events;
  std::vector<Eigen::Index> nonevents;
  for (Eigen::Index i = 0; i < n; ++i)
    (data.y[i] == 1.0 ? events : nonevents).push_back(i);
  if (events.empty() || nonevents.empty())
    throw DegenerateOutcome("leave-pair-out needs both outcome classes");

  AssessmentResult r = make_result(estimator, Method::LpoCv, metric);
  r.attempted_subsets =
      static_cast<long>(events.size()) * static_cast<long>(nonevents.size());
  if (plan.count_separation) r.separated_subsets = 0;

  double sum = 0.0;
  long valid = 0;
  Eigen::MatrixXd pair_X(2, data.p());
  for (const Eigen::Index e : events) {
    for (const Eigen::Index f : nonevents) {
      const auto idx = all_but(n, {e, f});
      const Dataset train = data.rows(idx);
      if (training_decision(train) != SubsetDecision::Ok) {
        ++r.discarded_subsets;
        continue;
      }
      if (plan.count_separation &&
          glm::detect_separation(train) == glm::SeparationStatus::Separated)
        ++r.separated_subsets;
      const auto predictor = estimator.fit(train);
      pair_X.row(0) = data.X.row(e);
      pair_X.row(1) = data.X.row(f);
      const Eigen::VectorXd pair = predictor->predict(pair_X);
      if (metric == MetricKind::CStatistic) {
        if (pair[0] > pair[1])
          sum += 1.0;
        else if (pair[0] == pair[1])
          sum += 0.5;
      } else {
        sum += pair[0] - pair[1];
      }
      ++valid;
    }
  }
  if (valid == 0)
    throw AllSubsetsDiscarded("every leave-pair-out subset was discarded");
  r.value = sum / static_cast<double>(valid);
  return r;
}

KfoldRep kfold_single_rep(const Dataset& data, const Estimator& estimator,
                          MetricKind metric, int folds, std::uint64_t seed,
                          bool count_separation) {
  const Eigen::Index n = data.n();
  if (folds > n) throw InvalidSpec("more folds than observations");
  Rng rng(seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

  KfoldRep rep;
  if (count_separation) rep.separated_folds = 0;
  double sum = 0.0;
  // First n mod f folds take the extra observation.
  const Eigen::Index base = n / folds;
  const Eigen::Index extra = n % folds;
  Eigen::Index offset = 0;
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index size = base + (f < extra ? 1 : 0);
    std::vector<Eigen::Index> eval_idx(perm.begin() + offset,
                                       perm.begin() + offset + size);
    std::vector<Eigen::Index> train_idx;
    train_idx.reserve(static_cast<std::size_t>(n - size));
    train_idx.insert(train_idx.end(), perm.begin(), perm.begin() + offset);
    train_idx.insert(train_idx.end(), perm.begin() + offset + size, perm.end());
    offset += size;

    const Dataset train = data.rows(train_idx);
    const Dataset eval = data.rows(eval_idx);
    if (subset_policy(train, eval, metric) != SubsetDecision::Ok) {
      ++rep.discarded_folds;
      continue;
    }
    if (count_separation &&
        glm::detect_separation(train) == glm::SeparationStatus::Separated)
      ++rep.separated_folds;
    const auto predictor = estimator.fit(train);
    sum += metrics::evaluate(metric, predict_set(*predictor, eval)).value;
    ++rep.valid_folds;
  }
  if (rep.valid_folds > 0) rep.value = sum / rep.valid_folds;
  return rep;
}

AssessmentResult kfold_cv(const Dataset& data, const Estimator& estimator,
                          MetricKind metric, const ResamplePlan& plan) {
  plan.validate();
  AssessmentResult r = make_result(estimator, Method::KfoldCv, metric);
  r.attempted_subsets = static_cast<long>(plan.folds) * plan.repetitions;
  if (plan.count_separation) r.separated_subsets = 0;

  double sum = 0.0;
  int valid_reps = 0;
  for (int rep_i = 0; rep_i < plan.repetitions; ++rep_i) {
    const std::uint64_t seed =
        derive_subset_seed(plan.base_seed, "kfold", rep_i);
    const KfoldRep rep = kfold_single_rep(data, estimator, metric, plan.folds,
                                          seed, plan.count_separation);
    r.discarded_subsets += rep.discarded_folds;
    if (plan.count_separation) r.separated_subsets += rep.separated_folds;
    if (rep.valid_folds > 0) {
      sum += rep.value;
      ++valid_reps;
    }
  }
  if (valid_reps == 0)
    throw AllSubsetsDiscarded("every cross-validation fold was discarded");
  r.value = sum / valid_reps;
  return r;
}

AssessmentResult enhanced_bootstrap(const Dataset& data,
                                    const Estimator& estimator,
                                    MetricKind metric,
                                    const ResamplePlan& plan) {
  plan.validate();
  AssessmentResult r = make_result(estimator, Method::EnhancedBootstrap, metric);
  r.attempted_subsets = plan.bootstrap_count;
  if (plan.count_separation) r.separated_subsets = 0;

  const auto full_fit = estimator.fit(data);
  const double apparent_value =
      metrics::evaluate(metric, predict_set(*full_fit, data)).value;

  double sum_boot = 0.0;
  double sum_orig = 0.0;
  long valid = 0;
  for (int b = 0; b < plan.bootstrap_count; ++b) {
    Rng rng(derive_subset_seed(plan.base_seed, "enhboot", b));
    const auto idx = bootstrap_indices(data.n(), rng);
    const Dataset resample = data.rows(idx);
    if (subset_policy(resample, resample, metric) != SubsetDecision::Ok) {
      ++r.discarded_subsets;
      continue;
    }
    if (plan.count_separation &&
        glm::detect_separation(resample) == glm::SeparationStatus::Separated)
      ++r.separated_subsets;
    const auto predictor = estimator.fit(resample);
    sum_boot += metrics::evaluate(metric, predict_set(*predictor, resample)).value;
    sum_orig += metrics::evaluate(metric, predict_set(*predictor, data)).value;
    ++valid;
  }
  if (valid == 0)
    throw AllSubsetsDiscarded("every bootstrap resample was discarded");
  r.value = enhanced_corrected(apparent_value, sum_boot / valid, sum_orig / valid);
  return r;
}

double brier_noinfo(const metrics::PredictionSet& preds) {
  const Eigen::Index n = preds.size();
  const double event_rate = preds.outcomes.mean();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double p = preds.probs[j];
    sum += event_rate * (1.0 - p) * (1.0 - p) + (1.0 - event_rate) * p * p;
  }
  return sum / static_cast<double>(n);
}

double dot632_null_value(MetricKind metric,
                         const metrics::PredictionSet& apparent_preds) {
  switch (metric) {
    case MetricKind::CStatistic: return 0.5;
    case MetricKind::DiscriminationSlope: return 0.0;
    case MetricKind::BrierScore: return brier_noinfo(apparent_preds);
  }
  throw Error("unknown metric");
}

std::pair<double, Dot632Trace> dot632plus_combine(double apparent_value,
                                                  double oob_value,
                                                  double null_value,
                                                  bool larger_is_better) {
  Dot632Trace trace;
  trace.apparent = apparent_value;
  trace.null_value = null_value;

  const double sign = larger_is_better ? 1.0 : -1.0;
  // Work in "larger is better" orientation.
  double app = sign * apparent_value;
  double oob = sign * oob_value;
  const double null_v = sign * null_value;

  if (oob < null_v) oob = null_v;
  double r_hat = 0.0;
  if (oob <= app && app > null_v) {
    r_hat = (app - oob) / (app - null_v);
    r_hat = std::clamp(r_hat, 0.0, 1.0);
  }
  const double w_hat = 0.632 / (1.0 - 0.368 * r_hat);
  const double value = (1.0 - w_hat) * app + w_hat * oob;

  trace.oob = sign * oob;
  trace.r_hat = r_hat;
  trace.w_hat = w_hat;
  return {sign * value, trace};
}

std::pair<AssessmentResult, Dot632Trace> dot632plus(const Dataset& data,
                                                    const Estimator& estimator,
                                                    MetricKind metric,
                                                    const ResamplePlan& plan) {
  plan.validate();
  AssessmentResult r = make_result(estimator, Method::Dot632Plus, metric);
  r.attempted_subsets = plan.bootstrap_count;
  if (plan.count_separation) r.separated_subsets = 0;

  const auto full_fit = estimator.fit(data);
  const PredictionSet apparent_preds = predict_set(*full_fit, data);
  const double apparent_value = metrics::evaluate(metric, apparent_preds).value;
  const double null_value = dot632_null_value(metric, apparent_preds);

  double sum_oob = 0.0;
  long valid = 0;
  std::vector<char> in_resample(static_cast<std::size_t>(data.n()));
  for (int b = 0; b < plan.bootstrap_count; ++b) {
    Rng rng(derive_subset_seed(plan.base_seed, "boot632", b));
    const auto idx = bootstrap_indices(data.n(), rng);
    std::fill(in_resample.begin(), in_resample.end(), 0);
    for (const auto i : idx) in_resample[static_cast<std::size_t>(i)] = 1;
    std::vector<Eigen::Index> oob_idx;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      if (!in_resample[static_cast<std::size_t>(i)]) oob_idx.push_back(i);

    const Dataset resample = data.rows(idx);
    const Dataset oob = data.rows(oob_idx);
    if (oob.n() == 0 ||
        subset_policy(resample, oob, metric) != SubsetDecision::Ok) {
      ++r.discarded_subsets;
      continue;
    }
    if (plan.count_separation &&
        glm::detect_separation(resample) == glm::SeparationStatus::Separated)
      ++r.separated_subsets;
    const auto predictor = estimator.fit(resample);
    sum_oob += metrics::evaluate(metric, predict_set(*predictor, oob)).value;
    ++valid;
  }
  if (valid == 0)
    throw AllSubsetsDiscarded("every bootstrap resample was discarded");

  const auto [value, trace] =
      dot632plus_combine(apparent_value, sum_oob / valid, null_value,
                         metrics::larger_is_better(metric));
  r.value = value;
  return {r, trace};
}

AssessmentResult simple_bootstrap(const Dataset& data,
                                  const Estimator& estimator,
                                  MetricKind metric,
                                  const ResamplePlan& plan) {
  plan.validate();
  AssessmentResult r = make_result(estimator, Method::SimpleBootstrap, metric);
  r.attempted_subsets = plan.bootstrap_count;
  if (plan.count_separation) r.separated_subsets = 0;

  double sum = 0.0;
  long valid = 0;
  for (int b = 0; b < plan.bootstrap_count; ++b) {
    Rng rng(derive_subset_seed(plan.base_seed, "simpleboot", b));
    const auto idx = bootstrap_indices(data.n(), rng);
    const Dataset resample = data.rows(idx);
    if (training_decision(resample) != SubsetDecision::Ok) {
      ++r.discarded_subsets;
      continue;
    }
    if (plan.count_separation &&
        glm::detect_separation(resample) == glm::SeparationStatus::Separated)
      ++r.separated_subsets;
    const auto predictor = estimator.fit(resample);
    sum += metrics::evaluate(metric, predict_set(*predictor, data)).value;
    ++valid;
  }
  if (valid == 0)
    throw AllSubsetsDiscarded("every bootstrap resample was discarded");
  r.value = sum / static_cast<double>(valid);
  return r;
}

AssessmentResult assess(const Dataset& data, const Estimator& estimator,
                        MetricKind metric, const ResamplePlan& plan) {
  switch (plan.method) {
    case Method::Apparent: return apparent(data, estimator, metric);
    case Method::LooCv: return loo_cv(data, estimator, metric, plan);
    case Method::LpoCv: return lpo_cv(data, estimator, metric, plan);
    case Method::KfoldCv: return kfold_cv(data, estimator, metric, plan);
    case Method::EnhancedBootstrap:
      return enhanced_bootstrap(data, estimator, metric, plan);
    case Method::Dot632Plus:
      return dot632plus(data, estimator, metric, plan).first;
    case Method::SimpleBootstrap:
      return simple_bootstrap(data, estimator, metric, plan);
  }
  throw InvalidSpec("unknown resampling method");
}

}  // namespace logitval::resampling
