#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace berezin {

/// Dense complex matrix, row-major.
struct CMat {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> a;

  CMat() = default;
  CMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
  std::complex<double>& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const std::complex<double>& at(int i, int j) const {
    return a[static_cast<size_t>(i) * cols + j];
  }
  friend CMat operator-(const CMat& x, const CMat& y);
  friend CMat operator*(const CMat& x, const CMat& y);
};

/// Largest singular value via one-sided Jacobi orthogonalization,
/// iterated to 1e-12 relative tolerance.
double operator_norm(const CMat& m);

double max_abs_entry(const CMat& m);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int n = 0;
};

LineFit fit_line(const std::vector<std::pair<double, double>>& pts);

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector (Golub-Welsch needs only these).
/// diag has size n, off size n-1. Results sorted by eigenvalue.
void tridiag_eigen_first(std::vector<double> diag, std::vector<double> off,
                         std::vector<double>& eigenvalues,
                         std::vector<double>& first_components);

/// Quadrature rule for integrals  int_0^inf h(t) t^j (1+t)^(-(K+2)) dt
/// normalized by the Beta factor, i.e.  entry = sum_i w_i h(t_i) with
/// sum w_i = 1.  Exact for h that are polynomials in t/(1+t) and 1/(1+t)
/// of joint degree < 2*npts.
struct BetaRule {
  std::vector<double> nodes;    // t values in (0, inf)
  std::vector<double> weights;  // normalized, sum to 1
};

BetaRule gauss_jacobi_beta(int j, int K, int npts);

}  // namespace berezin
