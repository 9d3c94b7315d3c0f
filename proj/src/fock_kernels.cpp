#include "pairsim/fock_kernels.hpp"

#include <algorithm>
#include <cmath>

#include "pairsim/errors.hpp"
#include "pairsim/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pairsim::fock {

void PentaBands::resize(int n) {
  d = CVec::Zero(n);
  u1 = CVec::Zero(std::max(0, n - 1));
  l1 = CVec::Zero(std::max(0, n - 1));
  u2 = CVec::Zero(std::max(0, n - 2));
  l2 = CVec::Zero(std::max(0, n - 2));
}

PentaBands& PentaBands::operator+=(const PentaBands& o) {
  d += o.d;
  u1 += o.u1;
  l1 += o.l1;
  u2 += o.u2;
  l2 += o.l2;
  return *this;
}

PentaBands& PentaBands::operator*=(Cplx c) {
  d *= c;
  u1 *= c;
  l1 *= c;
  u2 *= c;
  l2 *= c;
  return *this;
}

double PentaBands::one_norm() const {
  const int n = size();
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    double col = std::abs(d[j]);
    if (j >= 1) col += std::abs(u1[j - 1]);
    if (j >= 2) col += std::abs(u2[j - 2]);
    if (j + 1 < n) col += std::abs(l1[j]);
    if (j + 2 < n) col += std::abs(l2[j]);
    worst = std::max(worst, col);
  }
  return worst;
}

namespace {

/// Shared by the serial and OpenMP kernels so each output element is the
/// same fixed-order sum regardless of threading.
inline void apply_column(const PentaBands& b, const CMat& v, CMat& out, int j) {
  const int n = b.size();
  auto vc = v.col(j);
  auto oc = out.col(j);
  oc = b.d.cwiseProduct(vc);
  if (n > 1) {
    oc.head(n - 1) += b.u1.cwiseProduct(vc.tail(n - 1));
    oc.tail(n - 1) += b.l1.cwiseProduct(vc.head(n - 1));
  }
  if (n > 2) {
    oc.head(n - 2) += b.u2.cwiseProduct(vc.tail(n - 2));
    oc.tail(n - 2) += b.l2.cwiseProduct(vc.head(n - 2));
  }
}

}  // namespace

void apply_bands_serial(const PentaBands& b, const CMat& v, CMat& out) {
  if (v.rows() != b.size()) throw NumericalError("apply_bands: row mismatch");
  out.resize(v.rows(), v.cols());
  for (int j = 0; j < v.cols(); ++j) apply_column(b, v, out, j);
}

void apply_bands_omp(const PentaBands& b, const CMat& v, CMat& out) {
  if (v.rows() != b.size()) throw NumericalError("apply_bands: row mismatch");
  out.resize(v.rows(), v.cols());
  const int cols = static_cast<int>(v.cols());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int j = 0; j < cols; ++j) apply_column(b, v, out, j);
}

void apply_bands(const PentaBands& b, const CMat& v, CMat& out) {
#ifdef _OPENMP
  if (static_cast<long>(v.rows()) * v.cols() >= 4096) {
    apply_bands_omp(b, v, out);
    return;
  }
#endif
  apply_bands_serial(b, v, out);
}

void expmv_inplace(const PentaBands& b, CMat& v, const ExpmvOptions& opts) {
  const int n = b.size();
  if (v.rows() != n) throw NumericalError("expmv: row mismatch");
  if (n == 0 || v.cols() == 0) return;

  // Shift by the trace mean so the series works on a smaller operator:
  // exp(B) = exp(mu) exp(B - mu I).
  const Cplx mu = b.d.sum() / static_cast<double>(n);
  PentaBands shifted = b;
  shifted.d.array() -= mu;

  const double norm = shifted.one_norm();
  const int n_steps = std::max(1, static_cast<int>(std::ceil(norm / 6.0)));
  PentaBands scaled = shifted;
  scaled *= Cplx(1.0 / n_steps, 0.0);

  const double tol2 = opts.tol * opts.tol;
  CMat term(v.rows(), v.cols());
  CMat next(v.rows(), v.cols());
  for (int s = 0; s < n_steps; ++s) {
    term = v;
    if (v.squaredNorm() == 0.0) break;
    bool converged = false;
    for (int k = 1; k <= opts.max_terms; ++k) {
      if (opts.serial)
        apply_bands_serial(scaled, term, next);
      else
        apply_bands(scaled, term, next);
      next /= static_cast<double>(k);
      term.swap(next);
      v += term;
      if (term.squaredNorm() <= tol2 * v.squaredNorm()) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw NumericalError("expmv: Taylor series failed to converge in " +
                           std::to_string(opts.max_terms) + " terms");
  }

  const Cplx phase = std::exp(mu);
  v *= phase;
}

}  // namespace pairsim::fock
