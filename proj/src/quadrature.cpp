#include <cmath>
#include <stdexcept>

#include "berezin/linalg.hpp"

namespace berezin {

// Golub-Welsch on the Jacobi weight (1-s)^alpha (1+s)^beta over [-1,1],
// then map s -> t = (1+s)/(1-s).  With alpha = K-j, beta = j this turns
// int_0^inf h(t) t^j (1+t)^(-(K+2)) dt / Beta(j+1, K+1-j) into
// sum_i w_i h(t_i), the w_i summing to one.
BetaRule gauss_jacobi_beta(int j, int K, int npts) {
  if (j < 0 || K < j) throw std::invalid_argument("gauss_jacobi_beta: need 0 <= j <= K");
  if (npts < 2) throw std::invalid_argument("gauss_jacobi_beta: need at least 2 nodes");
  const double alpha = static_cast<double>(K - j);
  const double beta = static_cast<double>(j);

  std::vector<double> diag(npts), off(npts - 1);
  const double ab = alpha + beta;
  diag[0] = (beta - alpha) / (ab + 2);
  for (int k = 1; k < npts; ++k) {
    double den = (2 * k + ab) * (2 * k + ab + 2);
    diag[k] = (beta * beta - alpha * alpha) / den;
  }
  for (int k = 1; k < npts; ++k) {
    double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    double den = (2 * k + ab) * (2 * k + ab) * (2 * k + ab + 1) * (2 * k + ab - 1);
    off[k - 1] = std::sqrt(num / den);
  }

  std::vector<double> nodes_s, first;
  tridiag_eigen_first(diag, off, nodes_s, first);

  BetaRule rule;
  rule.nodes.resize(npts);
  rule.weights.resize(npts);
  double sum = 0;
  for (int i = 0; i < npts; ++i) {
    double s = nodes_s[i];
    rule.nodes[i] = (1 + s) / (1 - s);
    rule.weights[i] = first[i] * first[i];
    sum += rule.weights[i];
  }
  // first-component squares already sum to 1; renormalize to kill rounding
  for (auto& w : rule.weights) w /= sum;
  return rule;
}

}  // namespace berezin
