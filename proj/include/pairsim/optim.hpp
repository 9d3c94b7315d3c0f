#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace pairsim::optim {

/// Residual function: params -> weighted residual vector r (chi^2 = r.r).
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LmOptions {
  int max_iters = 300;
  double xtol = 1.0e-12;   ///< step-size convergence threshold
  double ftol = 1.0e-12;   ///< relative chi^2 improvement threshold
  double lambda0 = 1.0e-3; ///< initial damping
  double jac_eps = 1.0e-6; ///< forward-difference step scale
};

struct LmResult {
  Eigen::VectorXd params;
  /// (J^T J)^-1 at the solution: the parameter covariance when the residuals
  /// are scaled by known absolute sigmas (multiply by chi2_reduced for the
  /// rescaled-by-fit-quality convention).
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  double chi2_reduced = 0.0;
  int iters = 0;
  bool converged = false;
};

/// Levenberg-Marquardt with forward-difference Jacobian. n_data is the
/// residual length used for chi2_reduced's degrees of freedom.
LmResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                             const LmOptions& opts = {});

}  // namespace pairsim::optim
