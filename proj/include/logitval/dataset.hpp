#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

namespace logitval {

/// Binary-outcome dataset: outcome vector y (0 = non-event, 1 = event) and
/// an n x p covariate matrix in original units.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }

  Eigen::Index event_count() const {
    return static_cast<Eigen::Index>(y.sum());
  }

  /// Validating constructor entry point: every y entry exactly 0 or 1, all
  /// values finite, n >= 2, p >= 1, unique column labels.
  static Dataset create(Eigen::VectorXd y, Eigen::MatrixXd X,
                        std::vector<std::string> names);

  /// Row subset / resample (indices may repeat). Invariants other than class
  /// balance are inherited from the parent, so no re-validation happens here;
  /// the result may have fewer than 2 rows when used as an evaluation slice.
  Dataset rows(std::span<const Eigen::Index> idx) const;
};

}  // namespace logitval
