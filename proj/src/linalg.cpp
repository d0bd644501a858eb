#include "berezin/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace berezin {

CMat operator-(const CMat& x, const CMat& y) {
  CMat r(x.rows, x.cols);
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

CMat operator*(const CMat& x, const CMat& y) {
  CMat r(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      auto v = x.at(i, k);
      if (v == std::complex<double>(0)) continue;
      for (int j = 0; j < y.cols; ++j) r.at(i, j) += v * y.at(k, j);
    }
  return r;
}

double max_abs_entry(const CMat& m) {
  double r = 0;
  for (auto& z : m.a) r = std::max(r, std::abs(z));
  return r;
}

double operator_norm(const CMat& m) {
  if (m.rows == 0 || m.cols == 0) return 0;
  // columns of a working copy
  int n = m.cols, rows = m.rows;
  std::vector<std::vector<std::complex<double>>> col(
      n, std::vector<std::complex<double>>(rows));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < rows; ++i) col[j][i] = m.at(i, j);

  auto dot = [&](int i, int j) {
    std::complex<double> s = 0;
    for (int r = 0; r < rows; ++r) s += std::conj(col[i][r]) * col[j][r];
    return s;
  };

  const double tol = 1e-12;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p)
      for (int q2 = p + 1; q2 < n; ++q2) {
        double app = dot(p, p).real(), aqq = dot(q2, q2).real();
        std::complex<double> apq = dot(p, q2);
        double mag = std::abs(apq);
        if (mag <= tol * std::sqrt(app * aqq) || mag == 0) continue;
        rotated = true;
        std::complex<double> phase = apq / mag;
        double tau = (aqq - app) / (2 * mag);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        double c = 1 / std::sqrt(1 + t * t), s = t * c;
        for (int r = 0; r < rows; ++r) {
          auto vp = col[p][r], vq = col[q2][r];
          col[p][r] = c * vp - s * std::conj(phase) * vq;
          col[q2][r] = s * phase * vp + c * vq;
        }
      }
    if (!rotated) break;
  }

  double best = 0;
  for (int j = 0; j < n; ++j) best = std::max(best, std::sqrt(dot(j, j).real()));
  return best;
}

LineFit fit_line(const std::vector<std::pair<double, double>>& pts) {
  LineFit f;
  f.n = static_cast<int>(pts.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  double mx = sx / f.n, my = sy / f.n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy < 1e-300) {
    f.r2 = 0;  // no variation to explain
  } else {
    double ssres = 0;
    for (auto& [x, y] : pts) {
      double e = y - (f.intercept + f.slope * x);
      ssres += e * e;
    }
    f.r2 = 1 - ssres / syy;
  }
  return f;
}

// Implicit QL with shifts on a symmetric tridiagonal matrix, accumulating
// only the first row of the eigenvector product.
void tridiag_eigen_first(std::vector<double> d, std::vector<double> e,
                         std::vector<double>& eigenvalues,
                         std::vector<double>& first) {
  int n = static_cast<int>(d.size());
  e.resize(n, 0.0);
  for (int i = n - 1; i >= 1; --i) e[i] = e[i - 1];
  e[0] = 0;
  std::vector<double> z(n, 0.0);
  if (n > 0) z[0] = 1.0;

  auto pythag = [](double a, double b) {
    double aa = std::abs(a), ab = std::abs(b);
    if (aa > ab) {
      double r = ab / aa;
      return aa * std::sqrt(1 + r * r);
    }
    if (ab == 0) return 0.0;
    double r = aa / ab;
    return ab * std::sqrt(1 + r * r);
  };

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m + 1]) <= 1e-15 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("tridiagonal QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2 * e[l + 1]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l + 1] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1, c = 1, p = 0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i + 1], b = c * e[i + 1];
          r = pythag(f, g);
          e[i + 2] = r;
          if (r == 0) {
            d[i + 1] -= p;
            e[m + 1] = 0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          double zi = z[i], zi1 = z[i + 1];
          z[i + 1] = s * zi + c * zi1;
          z[i] = c * zi - s * zi1;
        }
        if (r == 0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l + 1] = g;
        e[m + 1] = 0;
      }
    } while (m != l);
  }

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  eigenvalues.resize(n);
  first.resize(n);
  for (int i = 0; i < n; ++i) {
    eigenvalues[i] = d[idx[i]];
    first[i] = z[idx[i]];
  }
}

}  // namespace berezin
