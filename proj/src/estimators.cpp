#include "logitval/estimators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace logitval::glm {

namespace {

constexpr double kPivotRatio = 1e-12;   // rank threshold, relative to max pivot
constexpr double kLdltRatio = 1e-14;    // LDLT degeneracy guard inside fits
constexpr int kMaxHalvings = 5;

Eigen::MatrixXd augment_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  return A;
}

std::string column_label(const Dataset& data, Eigen::Index design_col) {
  if (design_col == 0) return "(intercept)";
  return data.names[static_cast<std::size_t>(design_col - 1)];
}

// Rank check on the intercept-augmented design; names a dependent column in
// the error, preferring a covariate over the intercept.
void check_full_rank(const Dataset& data, const Eigen::MatrixXd& A) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kPivotRatio);
  const Eigen::Index rank = qr.rank();
  if (rank < A.cols()) {
    // Blame the first column (in design order) that is dependent on its
    // predecessors; an unpivoted QR exposes that as a vanishing diagonal.
    Eigen::Index offending = qr.colsPermutation().indices()[rank];
    const Eigen::HouseholderQR<Eigen::MatrixXd> plain(A);
    const Eigen::VectorXd diag =
        plain.matrixQR().topRows(A.cols()).diagonal().cwiseAbs();
    const double dmax = diag.maxCoeff();
    for (Eigen::Index j = 0; j < diag.size(); ++j) {
      if (diag[j] <= 1e-10 * dmax) {
        offending = j;
        break;
      }
    }
    std::ostringstream msg;
    msg << "collinear design: column " << column_label(data, offending);
    throw CollinearDesign(msg.str());
  }
}

void check_two_classes(const Dataset& data) {
  const Eigen::Index k = data.event_count();
  if (k == 0 || k == data.n())
    throw SingleClassOutcome("outcome is restricted to one category");
}

struct LdltInfo {
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  bool usable = false;
  double logdet = 0.0;
};

LdltInfo decompose(const Eigen::MatrixXd& H) {
  LdltInfo out;
  out.ldlt.compute(H);
  const Eigen::VectorXd d = out.ldlt.vectorD();
  double dmax = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    dmax = std::max(dmax, std::abs(d[i]));
  out.usable = d.allFinite() && dmax > 0.0;
  for (Eigen::Index i = 0; i < d.size() && out.usable; ++i) {
    if (!(d[i] > kLdltRatio * dmax)) out.usable = false;
  }
  if (out.usable) out.logdet = d.array().log().sum();
  return out;
}

Eigen::VectorXd hat_diagonals_from(const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& w,
                                   const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  const Eigen::MatrixXd B = ldlt.solve(A.transpose());  // m x n
  Eigen::VectorXd h(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    h[i] = w[i] * A.row(i).dot(B.col(i));
  return h;
}

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample standard deviation (n-1 denominator)
};

Standardization standardize_columns(const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  Standardization s;
  s.mean = data.X.colwise().mean();
  s.sd.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double ss = (data.X.col(j).array() - s.mean[j]).square().sum();
    s.sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(s.sd[j] > 0.0)) {
      std::ostringstream msg;
      msg << "collinear design: column " << data.names[j]
          << " is constant";
      throw CollinearDesign(msg.str());
    }
  }
  return s;
}

// Generic damped Newton loop. Callbacks evaluate the objective and fill
// score/Hessian at the current beta; the Hessian must be the negative of the
// objective's second derivative (positive definite near the optimum).
template <class Objective, class ScoreHessian>
FittedModel newton_fit(Eigen::Index m, const EstimatorSpec& spec,
                       Objective&& objective, ScoreHessian&& score_hessian,
                       FitTrace* trace, Eigen::VectorXd start) {
  FittedModel fit;
  fit.beta = start.size() == m ? std::move(start)
                               : Eigen::VectorXd::Zero(m).eval();
  double obj = objective(fit.beta);
  if (trace) trace->objective.push_back(obj);

  Eigen::VectorXd score(m);
  Eigen::MatrixXd hessian(m, m);
  for (int it = 1; it <= spec.max_iterations; ++it) {
    fit.iterations = it;
    score_hessian(fit.beta, score, hessian);
    const LdltInfo info = decompose(hessian);
    if (!info.usable) break;
    Eigen::VectorXd delta = info.ldlt.solve(score);
    if (!delta.allFinite()) break;
    if (delta.cwiseAbs().maxCoeff() <= spec.convergence_tolerance) {
      fit.converged = true;
      break;
    }
    // Step-halving; candidates within rounding noise of the current value
    // are accepted so that iterations at a numerically flat optimum can
    // still shrink delta below the convergence tolerance.
    const double slack = 1e-11 * (1.0 + std::abs(obj));
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half <= kMaxHalvings; ++half) {
      const Eigen::VectorXd cand = fit.beta + step * delta;
      const double cand_obj = objective(cand);
      if (std::isfinite(cand_obj) && cand_obj >= obj - slack) {
        fit.beta = cand;
        obj = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    if (trace) trace->objective.push_back(obj);
  }
  return fit;
}

struct RidgeCore {
  Eigen::VectorXd beta_std;  // coefficients on the standardized design
  bool converged = false;
  int iterations = 0;
  double loglik = 0.0;
  double df_e = 0.0;
};

double trace_df(const Eigen::MatrixXd& info, double lambda) {
  Eigen::MatrixXd penalized = info;
  for (Eigen::Index j = 1; j < info.cols(); ++j) penalized(j, j) += 2.0 * lambda;
  const LdltInfo dec = decompose(penalized);
  if (!dec.usable)
    throw SingularPenalizedHessian("penalized Hessian is singular");
  return dec.ldlt.solve(info).trace();
}

RidgeCore ridge_core(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                     double lambda, const EstimatorSpec& spec, FitTrace* trace,
                     Eigen::VectorXd start) {
  const Eigen::Index m = A.cols();
  auto objective = [&](const Eigen::VectorXd& b) {
    const double penalty = lambda * b.tail(m - 1).squaredNorm();
    return bernoulli_loglik(y, A * b) - penalty;
  };
  auto score_hessian = [&](const Eigen::VectorXd& b, Eigen::VectorXd& score,
                           Eigen::MatrixXd& hessian) {
    const Eigen::VectorXd eta = A * b;
    Eigen::VectorXd pi(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) pi[i] = sigmoid(eta[i]);
    const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
    score = A.transpose() * (y - pi);
    score.tail(m - 1) -= 2.0 * lambda * b.tail(m - 1);
    hessian = A.transpose() * w.asDiagonal() * A;
    for (Eigen::Index j = 1; j < m; ++j) hessian(j, j) += 2.0 * lambda;
  };
  FittedModel fit = newton_fit(m, spec, objective, score_hessian, trace,
                               std::move(start));
  RidgeCore core;
  core.beta_std = fit.beta;
  core.converged = fit.converged;
  core.iterations = fit.iterations;
  core.loglik = bernoulli_loglik(y, A * fit.beta);

  const Eigen::VectorXd eta = A * fit.beta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double pi = sigmoid(eta[i]);
    w[i] = pi * (1.0 - pi);
  }
  const Eigen::MatrixXd info = A.transpose() * w.asDiagonal() * A;
  core.df_e = trace_df(info, lambda);
  return core;
}

Eigen::VectorXd to_standardized_scale(const Eigen::VectorXd& beta,
                                      const Standardization& s) {
  const Eigen::Index m = beta.size();
  Eigen::VectorXd b = beta;
  for (Eigen::Index j = 1; j < m; ++j) b[j] = beta[j] * s.sd[j - 1];
  b[0] = beta[0] + beta.tail(m - 1).dot(s.mean);
  return b;
}

Eigen::VectorXd to_original_scale(const Eigen::VectorXd& beta_std,
                                  const Standardization& s) {
  const Eigen::Index m = beta_std.size();
  Eigen::VectorXd b = beta_std;
  double shift = 0.0;
  for (Eigen::Index j = 1; j < m; ++j) {
    b[j] = beta_std[j] / s.sd[j - 1];
    shift += b[j] * s.mean[j - 1];
  }
  b[0] = beta_std[0] - shift;
  return b;
}

void basic_spec_checks(const EstimatorSpec& spec) {
  if (spec.max_iterations < 1)
    throw InvalidSpec("max_iterations must be at least 1");
  if (!(spec.convergence_tolerance > 0.0))
    throw InvalidSpec("convergence_tolerance must be positive");
}

}  // namespace

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Ml: return "ml";
    case EstimatorKind::Firth: return "firth";
    case EstimatorKind::Ridge: return "ridge";
  }
  return "?";
}

void EstimatorSpec::validate() const {
  basic_spec_checks(*this);
  if (kind == EstimatorKind::Ridge) {
    if (lambda_grid.empty())
      throw InvalidSpec("ridge requires a lambda grid");
    if (lambda_grid.front() != 0.0)
      throw InvalidSpec("lambda grid must start at 0");
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
      if (!(lambda_grid[i] > lambda_grid[i - 1]))
        throw InvalidSpec("lambda grid must be strictly increasing");
    }
  }
}

std::vector<double> default_lambda_grid(Eigen::Index n) {
  const double lo = 1e-4 * static_cast<double>(n);
  const double hi = 1e4 * static_cast<double>(n);
  const int points = 96;
  std::vector<double> grid;
  grid.reserve(points + 1);
  grid.push_back(0.0);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    grid.push_back(std::exp(log_lo + t * (log_hi - log_lo)));
  }
  return grid;
}

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  // sum_i y_i eta_i - log(1 + exp(eta_i)), softplus evaluated stably.
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = eta[i];
    const double softplus =
        e >= 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y[i] * e - softplus;
  }
  return ll;
}

FittedModel fit_ml(const Dataset& data, const EstimatorSpec& spec,
                   FitTrace* trace) {
  basic_spec_checks(spec);
  check_two_classes(data);
  const Eigen::MatrixXd A = augment_intercept(data.X);
  check_full_rank(data, A);
  const Eigen::Index m = A.cols();

  auto objective = [&](const Eigen::VectorXd& b) {
    return bernoulli_loglik(data.y, A * b);
  };
  auto score_hessian = [&](const Eigen::VectorXd& b, Eigen::VectorXd& score,
                           Eigen::MatrixXd& hessian) {
    const Eigen::VectorXd eta = A * b;
    Eigen::VectorXd pi(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) pi[i] = sigmoid(eta[i]);
    const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
    score = A.transpose() * (data.y - pi);
    hessian = A.transpose() * w.asDiagonal() * A;
  };
  FittedModel fit = newton_fit(m, spec, objective, score_hessian, trace,
                               Eigen::VectorXd());
  fit.df_e = static_cast<double>(m);
  fit.loglik = objective(fit.beta);
  return fit;
}

FittedModel fit_firth(const Dataset& data, const EstimatorSpec& spec,
                      FitTrace* trace) {
  basic_spec_checks(spec);
  const Eigen::MatrixXd A = augment_intercept(data.X);
  check_full_rank(data, A);
  const Eigen::Index m = A.cols();

  auto objective = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = A * b;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double pi = sigmoid(eta[i]);
      w[i] = pi * (1.0 - pi);
    }
    const LdltInfo info = decompose(A.transpose() * w.asDiagonal() * A);
    if (!info.usable) return -std::numeric_limits<double>::infinity();
    return bernoulli_loglik(data.y, eta) + 0.5 * info.logdet;
  };
  auto score_hessian = [&](const Eigen::VectorXd& b, Eigen::VectorXd& score,
                           Eigen::MatrixXd& hessian) {
    const Eigen::VectorXd eta = A * b;
    Eigen::VectorXd pi(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) pi[i] = sigmoid(eta[i]);
    const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
    hessian = A.transpose() * w.asDiagonal() * A;
    const LdltInfo info = decompose(hessian);
    Eigen::VectorXd residual = data.y - pi;
    if (info.usable) {
      const Eigen::VectorXd h = hat_diagonals_from(A, w, info.ldlt);
      residual += (h.array() * (0.5 - pi.array())).matrix();
    }
    score = A.transpose() * residual;
  };
  FittedModel fit = newton_fit(m, spec, objective, score_hessian, trace,
                               Eigen::VectorXd());
  fit.df_e = static_cast<double>(m);
  fit.loglik = bernoulli_loglik(data.y, A * fit.beta);
  return fit;
}

FittedModel fit_ridge_fixed(const Dataset& data, double lambda,
                            const EstimatorSpec& spec, FitTrace* trace) {
  basic_spec_checks(spec);
  if (lambda < 0.0) throw InvalidSpec("ridge penalty must be non-negative");
  if (lambda == 0.0) {
    FittedModel fit = fit_ml(data, spec, trace);
    fit.lambda = 0.0;
    return fit;
  }
  check_two_classes(data);
  const Standardization s = standardize_columns(data);
  Eigen::MatrixXd A(data.n(), data.p() + 1);
  A.col(0).setOnes();
  for (Eigen::Index j = 0; j < data.p(); ++j)
    A.col(j + 1) = (data.X.col(j).array() - s.mean[j]) / s.sd[j];

  RidgeCore core =
      ridge_core(A, data.y, lambda, spec, trace, Eigen::VectorXd());
  FittedModel fit;
  fit.beta = to_original_scale(core.beta_std, s);
  fit.converged = core.converged;
  fit.iterations = core.iterations;
  fit.lambda = lambda;
  fit.df_e = core.df_e;
  fit.loglik = core.loglik;
  return fit;
}

FittedModel fit_ridge(const Dataset& data, const EstimatorSpec& spec) {
  spec.validate();
  if (spec.kind != EstimatorKind::Ridge)
    throw InvalidSpec("fit_ridge requires a ridge spec");
  check_two_classes(data);

  // lambda = 0 scores the ML fit; a non-converged (separated) fit enters the
  // comparison with its last-iteration values.
  FittedModel best = fit_ml(data, spec);
  best.lambda = 0.0;
  double best_aic = -2.0 * best.loglik + 2.0 * best.df_e;

  if (spec.lambda_grid.size() == 1) return best;

  const Standardization s = standardize_columns(data);
  Eigen::MatrixXd A(data.n(), data.p() + 1);
  A.col(0).setOnes();
  for (Eigen::Index j = 0; j < data.p(); ++j)
    A.col(j + 1) = (data.X.col(j).array() - s.mean[j]) / s.sd[j];

  Eigen::VectorXd warm = to_standardized_scale(best.beta, s);
  if (!warm.allFinite()) warm.setZero();

  for (std::size_t g = 1; g < spec.lambda_grid.size(); ++g) {
    const double lambda = spec.lambda_grid[g];
    RidgeCore core = ridge_core(A, data.y, lambda, spec, nullptr, warm);
    warm = core.beta_std;
    const double aic = -2.0 * core.loglik + 2.0 * core.df_e;
    if (aic <= best_aic) {  // ties prefer the larger penalty
      best_aic = aic;
      best.beta = to_original_scale(core.beta_std, s);
      best.converged = core.converged;
      best.iterations = core.iterations;
      best.lambda = lambda;
      best.df_e = core.df_e;
      best.loglik = core.loglik;
    }
  }
  return best;
}

FittedModel fit_glm(const Dataset& data, const EstimatorSpec& spec) {
  switch (spec.kind) {
    case EstimatorKind::Ml: return fit_ml(data, spec);
    case EstimatorKind::Firth: return fit_firth(data, spec);
    case EstimatorKind::Ridge: return fit_ridge(data, spec);
  }
  throw InvalidSpec("unknown estimator kind");
}

double effective_df(const Dataset& data, const FittedModel& model,
                    double lambda) {
  if (lambda < 0.0) throw InvalidSpec("ridge penalty must be non-negative");
  const Eigen::Index m = data.p() + 1;
  if (model.beta.size() != m)
    throw DimensionMismatch("model size does not match dataset");
  if (lambda == 0.0) return static_cast<double>(m);  // identical Hessians

  const Standardization s = standardize_columns(data);
  Eigen::MatrixXd A(data.n(), m);
  A.col(0).setOnes();
  for (Eigen::Index j = 0; j < data.p(); ++j)
    A.col(j + 1) = (data.X.col(j).array() - s.mean[j]) / s.sd[j];
  const Eigen::VectorXd beta_std = to_standardized_scale(model.beta, s);
  const Eigen::VectorXd eta = A * beta_std;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double pi = sigmoid(eta[i]);
    w[i] = pi * (1.0 - pi);
  }
  return trace_df(A.transpose() * w.asDiagonal() * A, lambda);
}

Eigen::VectorXd predict_probs(const FittedModel& model,
                              const Eigen::MatrixXd& X) {
  if (X.cols() + 1 != model.beta.size())
    throw DimensionMismatch("covariate count does not match model");
  Eigen::VectorXd eta =
      (X * model.beta.tail(model.beta.size() - 1)).array() + model.beta[0];
  for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = sigmoid(eta[i]);
  return eta;
}

FisherComponents fisher_components(const Dataset& data,
                                   const Eigen::VectorXd& beta) {
  const Eigen::MatrixXd A = augment_intercept(data.X);
  if (beta.size() != A.cols())
    throw DimensionMismatch("coefficient count does not match dataset");
  if (!beta.allFinite())
    throw InvalidSpec("fisher_components requires finite coefficients");
  const Eigen::VectorXd eta = A * beta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double pi = sigmoid(eta[i]);
    w[i] = pi * (1.0 - pi);
  }
  FisherComponents out;
  out.info = A.transpose() * w.asDiagonal() * A;
  const LdltInfo dec = decompose(out.info);
  if (!dec.usable)
    throw SingularInformation("Fisher information is singular");
  out.hat_diagonals = hat_diagonals_from(A, w, dec.ldlt);
  return out;
}

// ---------------------------------------------------------------------------
// Separation detection.
//
// Primal: maximize sum_i a_i' gamma subject to a_i' gamma >= 0 for all i and
// |gamma_j| <= 1, where a_i = (2 y_i - 1) [1, x_i] (rows scaled to unit
// norm; scaling changes the objective value but not its sign). The data are
// separated iff the optimum is positive.
//
// We solve the dual, which has only p+1 equality rows:
//   minimize 1' t+ + 1' t-   s.t.  -A' u + t+ - t- = c,  u, t+, t- >= 0
// with c = sum_i a_i. The t variables give an immediate identity basis, and
// Bland's rule keeps the (heavily degenerate) iteration finite.
// ---------------------------------------------------------------------------

SeparationStatus detect_separation(const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index m = data.p() + 1;

  Eigen::MatrixXd rows(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    rows(i, 0) = 1.0;
    rows.row(i).tail(m - 1) = data.X.row(i);
    const double sign = data.y[i] == 1.0 ? 1.0 : -1.0;
    rows.row(i) *= sign / rows.row(i).norm();
  }
  const Eigen::VectorXd c = rows.colwise().sum().transpose();

  const Eigen::Index cols = n + 2 * m;
  Eigen::MatrixXd T(m, cols);
  T.leftCols(n) = -rows.transpose();
  T.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  T.block(0, n + m, m, m) = -Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs = c;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  cost.tail(2 * m).setOnes();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    if (rhs[j] >= 0.0) {
      basis[static_cast<std::size_t>(j)] = n + j;
    } else {
      basis[static_cast<std::size_t>(j)] = n + m + j;
      T.row(j) = -T.row(j);
      rhs[j] = -rhs[j];
    }
  }

  const double tol_rc = 1e-9;
  const double tol_pivot = 1e-10;
  const double threshold = 1e-7 * static_cast<double>(n);
  const long max_pivots = 2000 * (static_cast<long>(m) + 2) + 10 * n;

  double objective = rhs.sum();  // all basic costs are 1 initially
  for (long pivot_count = 0; pivot_count < max_pivots; ++pivot_count) {
    // Reduced costs recomputed in full each pass; the tableau is small.
    Eigen::VectorXd basis_cost(m);
    for (Eigen::Index j = 0; j < m; ++j)
      basis_cost[j] = cost[basis[static_cast<std::size_t>(j)]];
    const Eigen::RowVectorXd reduced =
        cost.transpose() - basis_cost.transpose() * T;
    objective = basis_cost.dot(rhs);

    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (reduced[j] < -tol_rc) {
        entering = j;  // Bland: smallest index
        break;
      }
    }
    if (entering < 0) break;

    Eigen::Index leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < m; ++r) {
      if (T(r, entering) > tol_pivot) {
        const double ratio = rhs[r] / T(r, entering);
        if (ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 &&
             (leaving < 0 || basis[static_cast<std::size_t>(r)] <
                                 basis[static_cast<std::size_t>(leaving)]))) {
          best_ratio = ratio;
          leaving = r;
        }
      }
    }
    if (leaving < 0) break;  // cannot happen for a bounded objective

    const double pivot = T(leaving, entering);
    T.row(leaving) /= pivot;
    rhs[leaving] /= pivot;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (r == leaving) continue;
      const double factor = T(r, entering);
      if (factor != 0.0) {
        T.row(r) -= factor * T.row(leaving);
        rhs[r] -= factor * rhs[leaving];
        if (rhs[r] < 0.0 && rhs[r] > -1e-12) rhs[r] = 0.0;
      }
    }
    basis[static_cast<std::size_t>(leaving)] = entering;
  }

  return objective > threshold ? SeparationStatus::Separated
                               : SeparationStatus::None;
}

}  // namespace logitval::glm
