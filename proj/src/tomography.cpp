#include "pairsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pairsim/constants.hpp"
#include "pairsim/errors.hpp"
#include "pairsim/fock_kernels.hpp"
#include "pairsim/io.hpp"
#include "pairsim/optim.hpp"
#include "pairsim/rng.hpp"

namespace pairsim::tomography {

std::string to_string(Sideband s) {
  return s == Sideband::Red ? "red" : "blue";
}

double sideband_p_down(const fock::PhononDistribution& dist, Sideband kind,
                       double rabi0, double eta, double gamma, double t) {
  const double scale = rabi0 * eta;
  double sum = 0.0;
  for (std::size_t n = 0; n < dist.p.size(); ++n) {
    const double root = kind == Sideband::Blue
                            ? std::sqrt(static_cast<double>(n + 1))
                            : std::sqrt(static_cast<double>(n));
    sum += dist.p[n] * std::cos(scale * root * t);
  }
  return 0.5 * (1.0 + std::exp(-gamma * t) * sum);
}

SidebandSignal simulate_sideband(const fock::PhononDistribution& dist,
                                 Sideband kind, double rabi0, double eta,
                                 double gamma,
                                 const std::vector<double>& times, int shots,
                                 std::uint64_t seed) {
  if (times.empty()) throw ConfigError("simulate_sideband: no sample times");
  if (shots < 0) throw ConfigError("simulate_sideband: negative shot count");
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (!(t >= 0.0) || t <= prev)
      throw ConfigError("simulate_sideband: times must be non-negative and "
                        "strictly increasing");
    prev = t;
  }

  SidebandSignal out;
  out.kind = kind;
  out.times = times;
  out.shots = shots;
  out.rabi0 = rabi0;
  out.eta = eta;
  out.gamma = gamma;
  out.p_down.reserve(times.size());

  SplitMix64 rng(seed);
  for (double t : times) {
    double p =
        std::clamp(sideband_p_down(dist, kind, rabi0, eta, gamma, t), 0.0, 1.0);
    if (shots > 0) {
      int k = 0;
      for (int s = 0; s < shots; ++s)
        if (rng.uniform01() < p) ++k;
      p = static_cast<double>(k) / shots;
    }
    out.p_down.push_back(p);
  }
  return out;
}

namespace {

struct SamplePoint {
  double t = 0.0;
  double y = 0.0;
  double sigma = 1.0;
  bool blue = true;
};

}  // namespace

ReconstructResult reconstruct_pn(const std::vector<SidebandSignal>& signals,
                                 const ReconstructOptions& opts) {
  if (signals.empty())
    throw ConfigError("reconstruct_pn: at least one signal is required");
  if (opts.n_max < 1) throw ConfigError("reconstruct_pn: n_max must be >= 1");

  const int nb = opts.n_max + 1;
  const double scale0 = signals.front().rabi0 * signals.front().eta;
  if (!(scale0 > 0.0))
    throw ConfigError("reconstruct_pn: signals carry no positive rabi0*eta");
  const double gamma0 =
      opts.gamma_init >= 0.0 ? opts.gamma_init : signals.front().gamma;

  std::vector<SamplePoint> pts;
  bool any_blue = false;
  for (const auto& s : signals) {
    if (s.times.size() != s.p_down.size())
      throw ConfigError("reconstruct_pn: signal times/p_down size mismatch");
    any_blue = any_blue || s.kind == Sideband::Blue;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      SamplePoint pt;
      pt.t = s.times[i];
      pt.y = s.p_down[i];
      pt.blue = s.kind == Sideband::Blue;
      if (s.shots > 0) {
        const double var = std::max(pt.y * (1.0 - pt.y), 0.0) / s.shots;
        pt.sigma = std::max(std::sqrt(var), opts.sigma_floor);
      }
      pts.push_back(pt);
    }
  }

  // Parameters: softmax logits z_1..z_{n_max} (z_0 = 0 fixes the shift
  // gauge), then optionally the Rabi scale as a factor of scale0 and gamma.
  int np = nb - 1;
  const int ip_scale = opts.fit_scale ? np++ : -1;
  const int ip_gamma = opts.fit_gamma ? np++ : -1;
  if (static_cast<int>(pts.size()) < np)
    throw ConfigError("reconstruct_pn: ill-posed fit, " +
                      std::to_string(pts.size()) + " points for " +
                      std::to_string(np) + " parameters");

  Eigen::VectorXd roots_blue(nb), roots_red(nb);
  for (int n = 0; n < nb; ++n) {
    roots_blue[n] = std::sqrt(static_cast<double>(n + 1));
    roots_red[n] = std::sqrt(static_cast<double>(n));
  }

  const auto unpack = [&](const Eigen::VectorXd& u, Eigen::VectorXd& prob,
                          double& scale, double& gamma) {
    double zmax = 0.0;
    for (int n = 1; n < nb; ++n) zmax = std::max(zmax, u[n - 1]);
    prob.resize(nb);
    prob[0] = std::exp(-zmax);
    for (int n = 1; n < nb; ++n) prob[n] = std::exp(u[n - 1] - zmax);
    prob /= prob.sum();
    scale = ip_scale >= 0 ? scale0 * u[ip_scale] : scale0;
    gamma = ip_gamma >= 0 ? u[ip_gamma] : gamma0;
  };

  const optim::ResidualFn fn = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd prob;
    double scale = 0.0, gamma = 0.0;
    unpack(u, prob, scale, gamma);
    Eigen::VectorXd res(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& pt = pts[i];
      const auto& roots = pt.blue ? roots_blue : roots_red;
      double sum = 0.0;
      for (int n = 0; n < nb; ++n)
        sum += prob[n] * std::cos(scale * roots[n] * pt.t);
      const double model = 0.5 * (1.0 + std::exp(-gamma * pt.t) * sum);
      res[i] = (model - pt.y) / pt.sigma;
    }
    return res;
  };

  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(np);
  if (ip_scale >= 0) u0[ip_scale] = 1.0;
  if (ip_gamma >= 0) u0[ip_gamma] = gamma0;
  const optim::LmResult lm = optim::levenberg_marquardt(fn, u0);

  ReconstructResult out;
  Eigen::VectorXd prob;
  unpack(lm.params, prob, out.scale, out.gamma);
  out.chi2_reduced = lm.chi2_reduced;
  out.converged = lm.converged;
  out.dist.p.assign(prob.data(), prob.data() + nb);
  // dP_n/dz_j = P_n (delta_nj - P_j), j >= 1
  out.dist.sigma.resize(nb);
  for (int n = 0; n < nb; ++n) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(np);
    for (int j = 1; j < nb; ++j)
      g[j - 1] = prob[n] * ((n == j ? 1.0 : 0.0) - prob[j]);
    out.dist.sigma[n] = std::sqrt(std::max(0.0, g.dot(lm.covariance * g)));
  }
  // The linearized error vanishes together with P_n at the softmax boundary,
  // which would let a bin fitted to exactly zero masquerade as infinitely
  // well known downstream. A bin consistent with zero is known no better
  // than a typical occupied bin, so floor at the occupied bins' median.
  std::vector<double> ref;
  for (int n = 0; n < nb; ++n)
    if (out.dist.p[n] > 1.0e-3) ref.push_back(out.dist.sigma[n]);
  if (!ref.empty()) {
    std::nth_element(ref.begin(), ref.begin() + ref.size() / 2, ref.end());
    const double med = ref[ref.size() / 2];
    for (double& s : out.dist.sigma) s = std::max(s, med);
  }

  if (!lm.converged)
    out.warnings.push_back("fit did not meet convergence thresholds after " +
                           std::to_string(lm.iters) + " iterations");
  if (!any_blue && prob[0] > 0.8)
    out.warnings.push_back(
        "only red-sideband signals for a vacuum-dominated state: P_0 is "
        "constrained only through normalization");
  return out;
}

namespace {

/// Populations of S(r e^{i theta}) D(|alpha|) applied to a thermal state,
/// computed from banded operator exponentials applied to the identity.
Eigen::VectorXd model_populations(double r, double theta, double abs_alpha,
                                  double n_bar, int dim) {
  using fock::CMat;
  using fock::Cplx;

  // A truncated window cannot distinguish parameter values past the point
  // where all window populations are tail; capping keeps the optimizer's
  // exploratory steps from requesting absurdly expensive exponentials.
  r = std::min(r, 3.0);
  abs_alpha = std::min(abs_alpha, 6.0);
  n_bar = std::min(n_bar, 4.0);

  Eigen::VectorXd s1(dim - 1), s2(dim - 2);
  for (int m = 0; m + 1 < dim; ++m)
    s1[m] = std::sqrt(static_cast<double>(m + 1));
  for (int m = 0; m + 2 < dim; ++m)
    s2[m] = std::sqrt(static_cast<double>((m + 1) * (m + 2)));

  Eigen::VectorXd pth(dim);
  const double q = n_bar / (1.0 + n_bar);
  {
    double w = 1.0;
    for (int m = 0; m < dim; ++m) {
      pth[m] = w;
      w *= q;
    }
  }
  pth /= pth.sum();
  int mc = 1;
  while (mc < dim && pth[mc] >= 1.0e-18) ++mc;

  // Only the thermally occupied columns of the unitary are needed.
  CMat u = CMat::Identity(dim, mc);
  fock::ExpmvOptions eopts;
  if (abs_alpha != 0.0) {
    fock::PentaBands gd;
    gd.resize(dim);
    for (int m = 0; m + 1 < dim; ++m) {
      gd.l1[m] = abs_alpha * s1[m];
      gd.u1[m] = -abs_alpha * s1[m];
    }
    fock::expmv_inplace(gd, u, eopts);
  }
  if (r != 0.0) {
    const Cplx xi = std::polar(r, theta);
    fock::PentaBands gs;
    gs.resize(dim);
    for (int m = 0; m + 2 < dim; ++m) {
      gs.u2[m] = 0.5 * std::conj(xi) * s2[m];
      gs.l2[m] = -0.5 * xi * s2[m];
    }
    fock::expmv_inplace(gs, u, eopts);
  }

  Eigen::VectorXd pn = Eigen::VectorXd::Zero(dim);
  for (int m = 0; m < mc; ++m) pn += pth[m] * u.col(m).cwiseAbs2();
  return pn;
}

}  // namespace

FitResult fit_parametrized(const fock::PhononDistribution& dist,
                           const ParamFitOptions& opts) {
  const int nw = static_cast<int>(dist.p.size());
  if (nw < 4)
    throw ConfigError("fit_parametrized: distribution too short to fit");
  if (!dist.sigma.empty() && dist.sigma.size() != dist.p.size())
    throw ConfigError("fit_parametrized: sigma/p size mismatch");
  const int dim = std::max(opts.n_max_model, 2 * nw) + 1;

  // Near-empty bins come in with sigma ~ P_n (the linearized softmax error
  // collapses at the boundary); flooring at a twentieth of the largest bin
  // sigma keeps them from dominating the weights.
  double sig_floor = 1.0e-6;
  for (double s : dist.sigma) sig_floor = std::max(sig_floor, 0.05 * s);
  Eigen::VectorXd y(nw), sig(nw);
  for (int n = 0; n < nw; ++n) {
    y[n] = dist.p[n];
    sig[n] = dist.sigma.empty() ? 1.0e-6
                                : std::max(dist.sigma[n], sig_floor);
  }

  const bool fit_n = opts.fit_n_bar;
  const int np = fit_n ? 4 : 3;

  // u = (u_r, theta, u_a [, u_n]); squares keep r, |alpha|, n_bar >= 0.
  const auto model_of = [&](const Eigen::VectorXd& u) {
    const double r = u[0] * u[0];
    const double a = u[2] * u[2];
    const double nb = fit_n ? u[3] * u[3] : opts.n_bar_th;
    Eigen::VectorXd pn = model_populations(r, u[1], a, nb, dim);
    Eigen::VectorXd win = pn.head(nw);
    win /= win.sum();
    return win;
  };
  const optim::ResidualFn fn = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd win = model_of(u);
    return Eigen::VectorXd(((win - y).array() / sig.array()).matrix());
  };

  double mean_n = 0.0;
  for (int n = 0; n < nw; ++n) mean_n += n * y[n];

  optim::LmResult best;
  double best_chi2 = std::numeric_limits<double>::infinity();
  const int starts = std::max(1, opts.theta_starts);
  optim::LmOptions scout;
  scout.max_iters = 60;
  for (int k = 0; k < starts; ++k) {
    Eigen::VectorXd u0(np);
    const double r0 = 0.4;
    u0[0] = std::sqrt(r0);
    u0[1] = kPi * k / starts;
    const double a2 =
        std::max(mean_n - std::sinh(r0) * std::sinh(r0) - opts.n_bar_th, 0.04);
    u0[2] = std::pow(a2, 0.25);
    if (fit_n) u0[3] = std::sqrt(std::max(opts.n_bar_th, 1.0e-3));
    const optim::LmResult lm = optim::levenberg_marquardt(fn, u0, scout);
    if (lm.chi2 < best_chi2) {
      best_chi2 = lm.chi2;
      best = lm;
    }
  }
  best = optim::levenberg_marquardt(fn, best.params);

  FitResult out;
  const Eigen::VectorXd& u = best.params;
  out.r = u[0] * u[0];
  out.abs_alpha = u[2] * u[2];
  out.n_bar_th = fit_n ? u[3] * u[3] : opts.n_bar_th;
  // populations see only the relative squeeze-displacement phase, and by
  // realness only its cosine: fold into [0, pi]
  double th = std::remainder(u[1], 2.0 * kPi);
  if (th < 0.0) th = -th;
  out.theta = th;
  out.chi2_reduced = best.chi2_reduced;
  out.converged = best.converged;

  // PDG-style scale factor: when the residuals scatter beyond the stated
  // sigmas (chi2/dof > 1), the quoted errors inherit that excess.
  const double scale = std::sqrt(std::max(1.0, best.chi2_reduced));
  const auto& cov = best.covariance;
  out.r_sigma =
      scale * 2.0 * std::abs(u[0]) * std::sqrt(std::max(0.0, cov(0, 0)));
  out.theta_sigma = scale * std::sqrt(std::max(0.0, cov(1, 1)));
  out.abs_alpha_sigma =
      scale * 2.0 * std::abs(u[2]) * std::sqrt(std::max(0.0, cov(2, 2)));
  out.n_bar_th_sigma =
      fit_n ? scale * 2.0 * std::abs(u[3]) * std::sqrt(std::max(0.0, cov(3, 3)))
            : 0.0;
  return out;
}

std::string fit_result_to_json(const FitResult& fit) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"r\": " << io::format_double(fit.r) << ",\n";
  os << "  \"r_sigma\": " << io::format_double(fit.r_sigma) << ",\n";
  os << "  \"theta\": " << io::format_double(fit.theta) << ",\n";
  os << "  \"theta_sigma\": " << io::format_double(fit.theta_sigma) << ",\n";
  os << "  \"abs_alpha\": " << io::format_double(fit.abs_alpha) << ",\n";
  os << "  \"abs_alpha_sigma\": " << io::format_double(fit.abs_alpha_sigma)
     << ",\n";
  os << "  \"n_bar_th\": " << io::format_double(fit.n_bar_th) << ",\n";
  os << "  \"n_bar_th_sigma\": " << io::format_double(fit.n_bar_th_sigma)
     << ",\n";
  os << "  \"chi2_reduced\": " << io::format_double(fit.chi2_reduced) << ",\n";
  os << "  \"converged\": " << (fit.converged ? "true" : "false") << "\n";
  os << "}\n";
  return os.str();
}

void write_signal_csv(const std::string& path, const SidebandSignal& signal) {
  std::ostringstream os;
  os << "t_seconds,p_down,shots,kind,rabi0,eta,gamma\n";
  for (std::size_t i = 0; i < signal.times.size(); ++i) {
    os << io::format_double(signal.times[i]) << ','
       << io::format_double(signal.p_down[i]) << ',' << signal.shots << ','
       << to_string(signal.kind) << ',' << io::format_double(signal.rabi0)
       << ',' << io::format_double(signal.eta) << ','
       << io::format_double(signal.gamma) << '\n';
  }
  io::write_text_file(path, os.str());
}

SidebandSignal read_signal_csv(const std::string& path) {
  const io::CsvTable table = io::read_csv(path);
  const std::vector<std::string> expect{"t_seconds", "p_down", "shots",
                                        "kind",      "rabi0",  "eta",
                                        "gamma"};
  if (table.header != expect)
    throw IoError(path + ": unexpected signal header");
  if (table.rows.empty()) throw IoError(path + ": empty signal file");

  SidebandSignal out;
  try {
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      out.times.push_back(std::stod(row[0]));
      out.p_down.push_back(std::stod(row[1]));
      if (i == 0) {
        out.shots = std::stoi(row[2]);
        if (row[3] == "red")
          out.kind = Sideband::Red;
        else if (row[3] == "blue")
          out.kind = Sideband::Blue;
        else
          throw IoError(path + ": unknown sideband kind '" + row[3] + "'");
        out.rabi0 = std::stod(row[4]);
        out.eta = std::stod(row[5]);
        out.gamma = std::stod(row[6]);
      }
    }
  } catch (const std::invalid_argument&) {
    throw IoError(path + ": malformed numeric field");
  } catch (const std::out_of_range&) {
    throw IoError(path + ": numeric field out of range");
  }
  return out;
}

}  // namespace pairsim::tomography
