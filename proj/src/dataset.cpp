#include "logitval/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "logitval/errors.hpp"

namespace logitval {

Dataset Dataset::create(Eigen::VectorXd y, Eigen::MatrixXd X,
                        std::vector<std::string> names) {
  const Eigen::Index n = y.size();
  if (X.rows() != n)
    throw InvalidDataset("outcome and covariate row counts differ");
  if (n < 2) throw InvalidDataset("need at least 2 observations");
  if (X.cols() < 1) throw InvalidDataset("need at least 1 covariate");
  if (static_cast<Eigen::Index>(names.size()) != X.cols())
    throw InvalidDataset("covariate label count does not match columns");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0)
      throw InvalidDataset("outcome entries must be exactly 0 or 1");
  }
  if (!X.allFinite()) throw InvalidDataset("covariates contain non-finite values");

  std::unordered_set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second)
      throw InvalidDataset("duplicate covariate label: " + name);
  }
  return Dataset{std::move(y), std::move(X), std::move(names)};
}

Dataset Dataset::rows(std::span<const Eigen::Index> idx) const {
  Dataset out;
  out.names = names;
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.y[static_cast<Eigen::Index>(r)] = y[idx[r]];
    out.X.row(static_cast<Eigen::Index>(r)) = X.row(idx[r]);
  }
  return out;
}

}  // namespace logitval
