#include "pairsim/optim.hpp"

#include <cmath>

#include "pairsim/errors.hpp"

namespace pairsim::optim {

namespace {

Eigen::MatrixXd forward_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r0, double eps) {
  Eigen::MatrixXd jac(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (int j = 0; j < x.size(); ++j) {
    const double step = eps * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    jac.col(j) = (fn(xp) - r0) / step;
    xp[j] = x[j];
  }
  return jac;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                             const LmOptions& opts) {
  LmResult out;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = fn(x);
  const Eigen::Index n_data = r.size();
  const Eigen::Index n_par = x.size();
  if (n_data < n_par)
    throw ConfigError("least-squares problem is under-determined: " +
                      std::to_string(n_data) + " residuals for " +
                      std::to_string(n_par) + " parameters");

  double chi2 = r.squaredNorm();
  double lambda = opts.lambda0;
  Eigen::MatrixXd jac, jtj;

  for (int it = 0; it < opts.max_iters && !out.converged; ++it) {
    out.iters = it + 1;
    jac = forward_jacobian(fn, x, r, opts.jac_eps);
    jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    const Eigen::VectorXd diag_scale =
        jtj.diagonal().cwiseMax(1.0e-12 * (1.0 + jtj.diagonal().maxCoeff()));

    bool stepped = false;
    while (lambda < 1.0e14) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * diag_scale;
      const Eigen::VectorXd dx = damped.ldlt().solve(-jtr);
      const Eigen::VectorXd xt = x + dx;
      const Eigen::VectorXd rt = fn(xt);
      const double c2 = rt.squaredNorm();
      if (c2 <= chi2 && dx.allFinite()) {
        const double drop = chi2 - c2;
        const double step_rel = dx.norm() / std::max(1.0, x.norm());
        x = xt;
        r = rt;
        chi2 = c2;
        lambda = std::max(lambda * 0.3, 1.0e-12);
        stepped = true;
        if (drop <= opts.ftol * std::max(chi2, 1.0e-300) ||
            step_rel <= opts.xtol)
          out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No damping admits a downhill step: flat to machine precision, i.e. a
    // (possibly local) minimum as far as the data can tell.
    if (!stepped) {
      out.converged = jtr.norm() <= 1.0e-6 * std::sqrt(chi2 + 1.0);
      break;
    }
  }

  out.params = x;
  out.chi2 = chi2;
  const double dof = std::max<double>(1.0, double(n_data) - double(n_par));
  out.chi2_reduced = chi2 / dof;
  jac = forward_jacobian(fn, x, r, opts.jac_eps);
  jtj = jac.transpose() * jac;
  out.covariance = jtj.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace pairsim::optim
