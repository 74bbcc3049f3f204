#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "logitval/dataset.hpp"
#include "logitval/errors.hpp"

namespace logitval::glm {

enum class EstimatorKind { Ml, Firth, Ridge };

const char* estimator_name(EstimatorKind kind);

/// Fitting configuration. Non-convergence at the iteration cap is not an
/// error: the last iterate is returned with converged=false, which is the
/// policy used for separated subsets throughout the resampling code.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Ml;
  int max_iterations = 25;
  double convergence_tolerance = 1e-8;  // max absolute coefficient change
  std::vector<double> lambda_grid;      // ridge only; 0 first, increasing

  static EstimatorSpec ml() { return {EstimatorKind::Ml}; }
  static EstimatorSpec firth() { return {EstimatorKind::Firth}; }
  static EstimatorSpec ridge(std::vector<double> grid) {
    EstimatorSpec s{EstimatorKind::Ridge};
    s.lambda_grid = std::move(grid);
    return s;
  }

  void validate() const;  // throws InvalidSpec
};

/// 0 prepended to 96 log-equidistant penalties spanning [1e-4 n, 1e4 n].
/// Scaling by n keeps the grid meaningful across sample sizes.
std::vector<double> default_lambda_grid(Eigen::Index n);

struct FittedModel {
  Eigen::VectorXd beta;  // p+1 coefficients incl. intercept, original units
  bool converged = false;
  bool separation_detected = false;
  std::optional<double> lambda;  // ridge only
  double df_e = 0.0;             // p+1 unless ridge
  double loglik = 0.0;           // unpenalized log-likelihood at beta
  int iterations = 0;
};

/// Objective values of the accepted Newton iterates (position 0 holds the
/// starting value). For ML this is the log-likelihood, otherwise the
/// penalized log-likelihood.
struct FitTrace {
  std::vector<double> objective;
};

struct FisherComponents {
  Eigen::MatrixXd info;           // X~' W X~, the negative Hessian of l
  Eigen::VectorXd hat_diagonals;  // leverages of the weighted hat matrix
};

enum class SeparationStatus { None, Separated };

/// Maximum likelihood logistic regression via Newton-Raphson with
/// step-halving. Stops at convergence_tolerance or max_iterations; on the
/// iteration cap the last iterate is returned with converged=false.
FittedModel fit_ml(const Dataset& data, const EstimatorSpec& spec,
                   FitTrace* trace = nullptr);

/// Firth's penalized likelihood: maximizes l(beta) + 1/2 log det I(beta)
/// through the modified score sum_i (y_i - pi_i + h_i (1/2 - pi_i)) x_i with
/// leverages recomputed each iteration. Yields finite coefficients even
/// under separation.
FittedModel fit_firth(const Dataset& data, const EstimatorSpec& spec,
                      FitTrace* trace = nullptr);

/// Ridge logistic regression at a fixed penalty: maximizes
/// l(beta) - lambda * sum_{j>=1} beta_j^2 on internally standardized
/// covariates (zero mean, unit sample standard deviation), intercept
/// unpenalized; coefficients are returned in original units. lambda = 0
/// delegates to fit_ml.
FittedModel fit_ridge_fixed(const Dataset& data, double lambda,
                            const EstimatorSpec& spec,
                            FitTrace* trace = nullptr);

/// Ridge with tuning: fits every grid penalty and keeps the one minimizing
/// AIC_pen(lambda) = -2 l(beta_hat) + 2 df_e(lambda) with l the unpenalized
/// log-likelihood. Ties go to the larger penalty. A non-converged lambda = 0
/// fit (separation) is scored with its last-iteration values.
FittedModel fit_ridge(const Dataset& data, const EstimatorSpec& spec);

/// Dispatch on spec.kind.
FittedModel fit_glm(const Dataset& data, const EstimatorSpec& spec);

/// Effective degrees of freedom
///   df_e = trace( d2l/dbeta2 (beta) * (d2l*/dbeta2 (beta))^-1 )
/// evaluated on the standardized scale used for penalization.
/// Exactly p+1 at lambda = 0.
double effective_df(const Dataset& data, const FittedModel& model,
                    double lambda);

/// Complete or quasi-complete separation test: decides whether some nonzero
/// direction gamma satisfies (2 y_i - 1)(gamma_0 + x_i' gamma) >= 0 for all
/// observations with at least one strict inequality, via a linear program
/// maximizing the summed margins under box constraints on gamma.
SeparationStatus detect_separation(const Dataset& data);

/// Elementwise 1 / (1 + exp(-beta_0 - x' beta)).
Eigen::VectorXd predict_probs(const FittedModel& model,
                              const Eigen::MatrixXd& X);

/// Fisher information X~' W X~ on the intercept-augmented design, with
/// W = diag(pi_i (1 - pi_i)), plus the hat-matrix diagonal
/// h_i = w_i x~_i' (X~' W X~)^-1 x~_i.
FisherComponents fisher_components(const Dataset& data,
                                   const Eigen::VectorXd& beta);

/// Numerically stable sigmoid / log-likelihood helpers shared with tests.
double sigmoid(double eta);
double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

}  // namespace logitval::glm
