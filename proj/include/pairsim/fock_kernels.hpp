#pragma once

#include <complex>

#include <Eigen/Dense>

namespace pairsim::fock {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Pentadiagonal operator: d is the main diagonal (size n), u1/l1 the first
/// super/sub diagonals (size n-1), u2/l2 the second (size n-2). All ladder
/// Hamiltonians in this project have this shape.
struct PentaBands {
  CVec d, u1, l1, u2, l2;

  int size() const { return static_cast<int>(d.size()); }
  void resize(int n);
  PentaBands& operator+=(const PentaBands& o);
  PentaBands& operator*=(Cplx c);
  /// Maximum column 1-norm (upper bound used to scale exp series).
  double one_norm() const;
};

/// out = B * v, one column at a time. Reference implementation.
void apply_bands_serial(const PentaBands& b, const CMat& v, CMat& out);

/// out = B * v with OpenMP over columns. Bitwise-identical to the serial
/// kernel: each output element is the same fixed-order 5-term sum.
void apply_bands_omp(const PentaBands& b, const CMat& v, CMat& out);

/// Dispatches to the OpenMP kernel when built with OpenMP and the problem
/// is large enough to amortize the fork, else the serial one.
void apply_bands(const PentaBands& b, const CMat& v, CMat& out);

struct ExpmvOptions {
  double tol = 1.0e-14;   ///< series truncation tolerance (relative)
  int max_terms = 60;     ///< per sub-step Taylor terms
  bool serial = false;    ///< force the reference kernel
};

/// v <- exp(B) v by scaled truncated Taylor with trace shift. Works for any
/// column count; cost scales with one_norm(B). Throws NumericalError if the
/// series fails to converge.
void expmv_inplace(const PentaBands& b, CMat& v, const ExpmvOptions& opts = {});

}  // namespace pairsim::fock
