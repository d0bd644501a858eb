#pragma once

// Toolkit for analytic symbols in the factorial-growth sense: partial sums
// a(eps, k) = sum_{l <= floor(eps k)} a_l k^-l, growth-constant fits,
// remainder-bound verification, exponential-rate fitting on residual
// sequences, inversion of operator series, and seminorm estimation for
// operators acting on jets.

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "berezin/jet.hpp"
#include "berezin/linalg.hpp"

namespace berezin {

/// Coefficient norms of a symbol prefix in some normed slot; scalars carry
/// their absolute value, jets the max-coefficient proxy norm.
struct NormedSymbol {
  std::vector<double> norms;
  std::optional<double> declared_growth;

  static NormedSymbol from_norms(std::vector<double> v) {
    NormedSymbol s;
    s.norms = std::move(v);
    return s;
  }

  template <class K>
  static NormedSymbol from_scalars(const std::vector<K>& coeffs) {
    NormedSymbol s;
    for (auto& c : coeffs) s.norms.push_back(abs_double(c));
    return s;
  }

  template <class K>
  static NormedSymbol from_jets(const std::vector<Jet<K>>& coeffs) {
    NormedSymbol s;
    for (auto& j : coeffs) s.norms.push_back(max_abs_coeff(j));
    return s;
  }
};

inline long floor_rat(const Rat& q) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return fl.get_si();
}

/// a(eps, k) = sum_{l <= floor(eps k)} a_l k^-l in the coefficient field.
template <class K>
K partial_sum(const std::vector<K>& coeffs, const Rat& eps, int k) {
  if (k < 1) throw DomainError("partial sums need k >= 1");
  long N = floor_rat(eps * k);
  if (N >= static_cast<long>(coeffs.size()))
    throw OrderError("symbol prefix too short for this partial sum",
                     static_cast<int>(N), static_cast<int>(coeffs.size()) - 1);
  K acc(0);
  K kk = ScalarMode<K>::from_rational(RatC(Rat(1) / Rat(k)));
  K pw(1);
  for (long l = 0; l <= N; ++l) {
    acc += pw * coeffs[static_cast<size_t>(l)];
    pw = pw * kk;
  }
  return acc;
}

/// C = max_l (|a_l| / l!)^(1/(l+1)); the smallest constant with
/// |a_l| <= C^(l+1) l! on the stored prefix.
inline double fit_factorial_growth(const NormedSymbol& a) {
  double c = 0;
  double fact = 1;
  for (size_t l = 0; l < a.norms.size(); ++l) {
    if (l > 0) fact *= static_cast<double>(l);
    c = std::max(c, std::pow(a.norms[l] / fact, 1.0 / (static_cast<double>(l) + 1)));
  }
  return c;
}

/// The default truncation policy: eps = 1 / (2 C_fit).
inline Rat default_truncation_eps(double c_fit) {
  if (!(c_fit > 0)) return rat(1, 2);
  double e = 1.0 / (2.0 * c_fit);
  if (e > 0.5) return rat(1, 2);
  // round down to a rational with a modest denominator
  long den = static_cast<long>(std::ceil(1.0 / e));
  return rat(1, den);
}

// ---------------------------------------------------------------------------
// remainder bounds

/// Verification that |u(k) - sum_{l<N} a_l k^-l| <= C^(N+1) k^-N N! on a
/// k-grid for all N up to the prefix length. Report-only.
struct RemainderReport {
  bool pass = true;
  double worst_ratio = 0;  // max over (k, N) of |difference| / bound
  int worst_k = 0;
  int worst_n = 0;
  int points = 0;
};

template <class K>
RemainderReport check_remainder_bound(const std::vector<std::pair<int, K>>& u,
                                      const std::vector<K>& coeffs, double growth_c,
                                      int max_n = -1) {
  if (max_n < 0) max_n = static_cast<int>(coeffs.size());
  RemainderReport rep;
  for (auto& [k, uk] : u) {
    for (int N = 0; N <= max_n && N <= static_cast<int>(coeffs.size()); ++N) {
      K sum(0);
      K kk = ScalarMode<K>::from_rational(RatC(Rat(1) / Rat(k)));
      K pw(1);
      for (int l = 0; l < N; ++l) {
        sum += pw * coeffs[static_cast<size_t>(l)];
        pw = pw * kk;
      }
      double diff = abs_double(K(uk - sum));
      double bound = std::pow(growth_c, N + 1) * std::pow(double(k), -N);
      for (int i = 2; i <= N; ++i) bound *= i;
      rep.points++;
      double ratio = bound == 0 ? (diff == 0 ? 0 : 1e300) : diff / bound;
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_k = k;
        rep.worst_n = N;
      }
      if (ratio > 1) rep.pass = false;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// exponential-rate fitting

struct RateFit {
  double rate = 0;     // decay rate r in residual ~ exp(-r k)
  double r2 = 0;       // quality of the log-linear fit
  int used = 0;        // samples that entered the fit
  int floored = 0;     // samples excluded as floor-limited
  bool all_floored = false;
  double floor = 0;    // the exclusion threshold used
};

/// Least-squares slope of log(residual) against k. Samples below ten times
/// the arithmetic epsilon are excluded and counted as floor-limited.
inline RateFit fit_exponential_rate(const std::vector<std::pair<int, double>>& res,
                                    double arithmetic_epsilon = 2.220446049250313e-16) {
  RateFit out;
  out.floor = 10 * arithmetic_epsilon;
  std::vector<std::pair<double, double>> pts;
  for (auto& [k, r] : res) {
    if (!(r > out.floor)) {
      out.floored++;
      continue;
    }
    pts.emplace_back(static_cast<double>(k), std::log(r));
  }
  out.used = static_cast<int>(pts.size());
  if (pts.empty()) {
    out.all_floored = true;
    return out;
  }
  if (pts.size() < 2) return out;
  LineFit f = fit_line(pts);
  out.rate = -f.slope;
  out.r2 = f.r2;
  return out;
}

// ---------------------------------------------------------------------------
// operator series

/// A named action on jets.
template <class K>
struct JetOperator {
  std::string id;
  std::function<Jet<K>(const Jet<K>&)> apply;
};

/// P_1..P_N of a formal series id - sum_l h^l P_l.
template <class K>
struct OperatorSeries {
  std::vector<JetOperator<K>> terms;  // terms[0] is P_1

  int levels() const { return static_cast<int>(terms.size()); }
  const JetOperator<K>& level(int l) const {
    return terms.at(static_cast<size_t>(l - 1));
  }
};

inline long composition_count_all(int m) {
  return m <= 0 ? (m == 0 ? 1 : 0) : 1L << (m - 1);
}

/// Inverse series id + sum_m h^m Q_m with
///   Q_m = sum over ordered tuples i_1+...+i_j = m of P_{i_1} ... P_{i_j};
/// the tuple count at order m is 2^(m-1). Guarded at 10 orders.
template <class K>
struct InvertedSeries {
  OperatorSeries<K> q;
  std::vector<long> composition_counts;  // per order 1..cap
};

template <class K>
InvertedSeries<K> invert_operator_series(const OperatorSeries<K>& p, int cap) {
  if (cap > 10) throw DomainError("operator series inversion guarded at 10 orders");
  InvertedSeries<K> out;
  auto shared = std::make_shared<OperatorSeries<K>>(p);
  for (int m = 1; m <= cap; ++m) {
    // ordered tuples of positive integers summing to m; tuples that would
    // use a level beyond the stored series act as zero and are dropped
    std::vector<std::vector<int>> tuples;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int left) {
      if (left == 0) {
        tuples.push_back(cur);
        return;
      }
      for (int i = 1; i <= left && i <= p.levels(); ++i) {
        cur.push_back(i);
        rec(left - i);
        cur.pop_back();
      }
    };
    rec(m);
    out.composition_counts.push_back(composition_count_all(m));

    JetOperator<K> qm;
    qm.id = "inverse_order_" + std::to_string(m);
    qm.apply = [tuples, shared](const Jet<K>& f) {
      Jet<K> acc(f.layout(), f.cap());
      for (auto& tuple : tuples) {
        Jet<K> g = f;
        for (auto it = tuple.rbegin(); it != tuple.rend(); ++it)
          g = shared->level(*it).apply(g);
        acc += g.truncated(acc.cap());
      }
      return acc;
    };
    out.q.terms.push_back(std::move(qm));
  }
  return out;
}

// ---------------------------------------------------------------------------
// seminorms

/// A certified lower bound for || P ||_{t,s} (sup over ||f||_t <= 1 of
/// ||P f||_s, with sup norms over polydiscs sampled on circle grids), plus
/// the Cauchy upper bound when the operator is a pure derivative.
struct SeminormEstimate {
  std::string op;
  double t = 0;
  double s = 0;
  int degree_cap = 0;
  double lower = 0;
  std::string attained_by;
  std::optional<double> upper;  // recorded alongside when known
};

/// Sup of |f| on the polydisc of radius r, sampled on a grid of
/// `grid` points per dimension.
template <class K>
double polydisc_sup(const Jet<K>& f, double r, int grid = 64) {
  const int nv = f.layout().vars();
  std::vector<std::complex<double>> point(nv);
  std::vector<int> idx(nv, 0);
  double best = 0;
  while (true) {
    for (int i = 0; i < nv; ++i) {
      double th = 2 * M_PI * idx[i] / grid;
      point[i] = std::polar(r, th);
    }
    best = std::max(best, std::abs(eval_at(f, point)));
    int pos = 0;
    while (pos < nv && ++idx[pos] == grid) idx[pos++] = 0;
    if (pos == nv) break;
  }
  return best;
}

template <class K>
SeminormEstimate seminorm_lower_bound(const JetOperator<K>& op,
                                      const VariableLayout& layout, double t,
                                      double s, int degree_cap, int jet_cap = -1) {
  if (!(t > s && s > 0)) throw DomainError("seminorm radii must satisfy t > s > 0");
  SeminormEstimate est;
  est.op = op.id;
  est.t = t;
  est.s = s;
  est.degree_cap = degree_cap;
  if (jet_cap < 0) jet_cap = degree_cap + 4;

  auto consider = [&](const Jet<K>& f, const std::string& label) {
    double nf = polydisc_sup(f, t);
    if (nf == 0) return;
    Jet<K> pf = op.apply(f);
    double np = polydisc_sup(pf, s);
    double ratio = np / nf;
    if (ratio > est.lower) {
      est.lower = ratio;
      est.attained_by = label;
    }
  };

  // normalized monomials up to the degree cap
  const int nv = layout.vars();
  std::vector<MultiIndex> monos;
  MultiIndex cur(nv, 0);
  std::function<void(int, int)> gen = [&](int pos, int left) {
    if (pos == nv) {
      monos.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[pos] = static_cast<uint16_t>(e);
      gen(pos + 1, left - e);
    }
    cur[pos] = 0;
  };
  gen(0, degree_cap);
  for (auto& mi : monos) {
    Jet<K> f(layout, jet_cap);
    f.set_coeff(mi, K(1));
    std::string label = "monomial";
    for (int i = 0; i < nv; ++i)
      if (mi[i]) label += " " + layout.var_name(i) + "^" + std::to_string(mi[i]);
    consider(f, label);
  }

  // a fixed corpus of small random polynomials (deterministic seed)
  uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&state] {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  for (int trial = 0; trial < 8; ++trial) {
    Jet<K> f(layout, jet_cap);
    for (auto& mi : monos) {
      long num = static_cast<long>(next() % 9) - 4;
      if (num == 0) continue;
      f.add_coeff(mi, ScalarMode<K>::from_rational(RatC(rat(num, 2))));
    }
    consider(f, "random polynomial " + std::to_string(trial));
  }
  return est;
}

/// Cauchy bound  || d^gamma ||_{t,s} <= gamma! / (t-s)^|gamma|  on polydiscs.
inline double cauchy_derivative_bound(const MultiIndex& gamma, double t, double s) {
  double b = 1;
  for (auto e : gamma)
    for (int i = 1; i <= e; ++i) b *= i;
  return b * std::pow(t - s, -static_cast<double>(order_of(gamma)));
}

}  // namespace berezin
