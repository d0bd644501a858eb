#pragma once

// Exact finite-k quantization on the projective line: sections of degree
// k + aux are polynomials of degree <= k + aux with Beta-integral inner
// products, so Toeplitz matrices of closed-form symbols have exact rational
// entries and every asymptotic claim can be tested at desk scale.

#include <complex>
#include <functional>

#include "berezin/linalg.hpp"
#include "berezin/radial.hpp"
#include "berezin/symbols.hpp"

namespace berezin {

inline constexpr int kOracleMaxDim = 256;

/// The degree-(k+aux) polynomial model space with its monomial norms;
/// ||z^j||^2 = 2 pi * j! (K-j)! / (K+1)! with K = k + aux.
struct Cp1Space {
  int k = 0;
  int aux = 0;
  int dim = 0;
  std::vector<Rat> norms_over_2pi;

  static Cp1Space make(int k, int aux) {
    if (k < 0 || aux < 0) throw DomainError("tensor powers must be nonnegative");
    Cp1Space s;
    s.k = k;
    s.aux = aux;
    s.dim = k + aux + 1;
    if (s.dim > kOracleMaxDim)
      throw DomainError("model space capped at dimension " +
                        std::to_string(kOracleMaxDim));
    const int K = k + aux;
    for (int j = 0; j <= K; ++j)
      s.norms_over_2pi.push_back(factorial(j) * factorial(K - j) /
                                 factorial(K + 1));
    return s;
  }
};

/// Multiplier in the closed-form class  sum c z^a zbar^b (1+|z|^2)^-d,
/// smooth on the whole line when d >= max(a, b) for every term.
struct OracleTerm {
  int a = 0;
  int b = 0;
  int d = 0;
  RatC coeff{Rat(1)};
};

struct OracleSymbol {
  std::vector<OracleTerm> terms;
  std::string name;

  static OracleSymbol parse(const std::string& spec);

  void validate() const {
    for (auto& t : terms) {
      if (t.a < 0 || t.b < 0)
        throw DomainError("symbol exponents must be nonnegative");
      if (t.d < std::max(t.a, t.b))
        throw DomainError("symbol term violates d >= max(a, b)");
    }
  }

  bool radial() const {
    for (auto& t : terms)
      if (t.a != t.b) return false;
    return true;
  }

  OracleSymbol conjugate() const {
    OracleSymbol s;
    s.name = name + "~";
    for (auto& t : terms) s.terms.push_back({t.b, t.a, t.d, t.coeff.conj()});
    return s;
  }

  /// Holomorphic extension as an exact closed-form element.
  BiRadial to_biradial() const {
    BiRadial f;
    for (auto& t : terms) f += BiRadial::monomial(t.a, t.b, t.d, t.coeff);
    return f;
  }

  std::complex<double> value(std::complex<double> z) const {
    std::complex<double> acc = 0;
    double t = std::norm(z);
    for (auto& term : terms) {
      std::complex<double> v(to_double(term.coeff.re), to_double(term.coeff.im));
      for (int i = 0; i < term.a; ++i) v *= z;
      for (int i = 0; i < term.b; ++i) v *= std::conj(z);
      v *= std::pow(1 + t, -term.d);
      acc += v;
    }
    return acc;
  }

  double sup_on_grid() const {
    double sup = 0;
    for (int i = 0; i <= 64; ++i) {
      double r = std::tan(M_PI * (i + 0.5) / 130.0);  // spreads over the line
      for (int a = 0; a < 16; ++a) {
        double th = 2 * M_PI * a / 16;
        sup = std::max(sup, std::abs(value(std::polar(r, th))));
      }
    }
    return sup;
  }
};

inline OracleSymbol OracleSymbol::parse(const std::string& spec) {
  OracleSymbol s;
  s.name = spec;
  if (spec == "1" || spec == "one") {
    s.terms.push_back({0, 0, 0, RatC(Rat(1))});
    return s;
  }
  if (spec == "h") {
    s.terms.push_back({1, 1, 1, RatC(Rat(1))});
    return s;
  }
  if (spec == "h2") {
    s.terms.push_back({2, 2, 2, RatC(Rat(1))});
    return s;
  }
  if (spec == "zred") {
    s.terms.push_back({1, 0, 1, RatC(Rat(1))});
    return s;
  }
  // generic: "a,b,d[:coeff];a,b,d[:coeff];..."
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t end = spec.find(';', pos);
    if (end == std::string::npos) end = spec.size();
    std::string item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    OracleTerm t;
    size_t colon = item.find(':');
    std::string nums = colon == std::string::npos ? item : item.substr(0, colon);
    if (colon != std::string::npos)
      t.coeff = RatC(parse_rational(item.substr(colon + 1)));
    int fields[3] = {0, 0, 0};
    size_t p2 = 0;
    for (int f = 0; f < 3; ++f) {
      size_t comma = nums.find(',', p2);
      std::string tok =
          comma == std::string::npos ? nums.substr(p2) : nums.substr(p2, comma - p2);
      if (tok.empty()) throw DomainError("malformed symbol term '" + item + "'");
      fields[f] = std::stoi(tok);
      p2 = comma == std::string::npos ? nums.size() : comma + 1;
    }
    t.a = fields[0];
    t.b = fields[1];
    t.d = fields[2];
    s.terms.push_back(t);
  }
  if (s.terms.empty()) throw DomainError("empty symbol spec '" + spec + "'");
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Toeplitz matrices

struct ToeplitzMatrix {
  int k = 0;
  int aux = 0;
  int dim = 0;
  std::vector<std::vector<RatC>> entries;  // exact, monomial basis, [j][i]
  std::string provenance;

  /// Matrix in the orthonormalized basis (the one whose singular values
  /// are the operator's); the monomial basis differs by the norm weights.
  CMat to_cmat() const {
    std::vector<double> w;  // ||z^j||, up to the common 2 pi factor
    Cp1Space space = Cp1Space::make(k, aux);
    for (auto& q : space.norms_over_2pi) w.push_back(std::sqrt(to_double(q)));
    CMat m(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) {
        double scale = w[static_cast<size_t>(j)] / w[static_cast<size_t>(i)];
        m.at(j, i) = {to_double(entries[j][i].re) * scale,
                      to_double(entries[j][i].im) * scale};
      }
    return m;
  }

  /// Hermiticity of the operator: in the monomial basis this reads
  /// T[j][i] q_j = conj(T[i][j]) q_i with the exact norm weights.
  bool is_hermitian_exact() const {
    Cp1Space space = Cp1Space::make(k, aux);
    auto& nq = space.norms_over_2pi;
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i <= j; ++i) {
        RatC lhs = entries[j][i] * RatC(nq[static_cast<size_t>(j)]);
        RatC rhs = entries[i][j].conj() * RatC(nq[static_cast<size_t>(i)]);
        if (!(lhs == rhs)) return false;
      }
    return true;
  }
};

namespace detail {

/// <z^(i+a) zbar^(j+b) (1+t)^-d z^i, z^j>-anchored exact entry update:
/// one symbol term contributes to T[j][i] with j = i + a - b the value
///   (i+a)! (K+d-i-a)! (K+1)! / ((K+d+1)! j! (K-j)!).
inline void add_term_entries(ToeplitzMatrix& T, const OracleTerm& t) {
  const int K = T.k + T.aux;
  for (int i = 0; i < T.dim; ++i) {
    int j = i + t.a - t.b;
    if (j < 0 || j >= T.dim) continue;
    Rat num = factorial(i + t.a) * factorial(K + t.d - i - t.a) * factorial(K + 1);
    Rat den = factorial(K + t.d + 1) * factorial(j) * factorial(K - j);
    T.entries[static_cast<size_t>(j)][static_cast<size_t>(i)] +=
        t.coeff * RatC(num / den);
  }
}

}  // namespace detail

inline ToeplitzMatrix toeplitz_matrix(const OracleSymbol& f, int k, int aux) {
  f.validate();
  Cp1Space space = Cp1Space::make(k, aux);
  ToeplitzMatrix T;
  T.k = k;
  T.aux = aux;
  T.dim = space.dim;
  T.provenance = "symbol " + f.name;
  T.entries.assign(static_cast<size_t>(T.dim),
                   std::vector<RatC>(static_cast<size_t>(T.dim), RatC(Rat(0))));
  for (auto& t : f.terms) detail::add_term_entries(T, t);
  return T;
}

/// Exact Toeplitz matrix of a closed-form function given as a BiRadial
/// element (weights become bands).
inline ToeplitzMatrix toeplitz_of_biradial(const BiRadial& f, int k, int aux,
                                           const std::string& provenance) {
  Cp1Space space = Cp1Space::make(k, aux);
  ToeplitzMatrix T;
  T.k = k;
  T.aux = aux;
  T.dim = space.dim;
  T.provenance = provenance;
  T.entries.assign(static_cast<size_t>(T.dim),
                   std::vector<RatC>(static_cast<size_t>(T.dim), RatC(Rat(0))));
  for (auto& [key, c] : f.terms()) {
    auto [m, d] = key;
    if (d < std::abs(m))
      throw DomainError("closed-form function is not integrable against the model");
    OracleTerm t;
    t.a = std::max(m, 0);
    t.b = std::max(-m, 0);
    t.d = d;
    t.coeff = c;
    detail::add_term_entries(T, t);
  }
  return T;
}

/// Diagonal Toeplitz matrix of a radial function by per-row Gauss-Jacobi
/// quadrature on the Beta weight. `converged` reports a node-halving
/// self-check on the extreme rows.
inline ToeplitzMatrix toeplitz_by_quadrature(const std::function<double(double)>& h,
                                             int k, int aux, int nodes = 64,
                                             bool* converged = nullptr) {
  Cp1Space space = Cp1Space::make(k, aux);
  const int K = k + aux;
  ToeplitzMatrix T;
  T.k = k;
  T.aux = aux;
  T.dim = space.dim;
  T.provenance = "quadrature";
  T.entries.assign(static_cast<size_t>(T.dim),
                   std::vector<RatC>(static_cast<size_t>(T.dim), RatC(Rat(0))));
  if (converged) *converged = true;
  for (int j = 0; j <= K; ++j) {
    BetaRule rule = gauss_jacobi_beta(j, K, nodes);
    double acc = 0;
    for (int i = 0; i < nodes; ++i) acc += rule.weights[i] * h(rule.nodes[i]);
    if (converged && (j == 0 || j == K || j == K / 2)) {
      BetaRule half = gauss_jacobi_beta(j, K, nodes / 2);
      double acc2 = 0;
      for (size_t i = 0; i < half.nodes.size(); ++i)
        acc2 += half.weights[i] * h(half.nodes[i]);
      if (std::abs(acc - acc2) > 1e-8 * (1 + std::abs(acc))) *converged = false;
    }
    // store as a float-valued rational for uniform downstream handling
    T.entries[static_cast<size_t>(j)][static_cast<size_t>(j)] =
        RatC(Rat(static_cast<long>(std::llround(acc * 1e18)), 1000000000000000000L));
  }
  for (auto& row : T.entries)
    for (auto& e : row) e.re.canonicalize();
  return T;
}

/// |Pi_k(z, conj w)| in the metric frame,
/// ((K+1)/2pi) |1+z conj w|^K (1+|z|^2)^(-K/2) (1+|w|^2)^(-K/2).
inline double bergman_kernel_value(int k, int aux, std::complex<double> z,
                                   std::complex<double> w) {
  const int K = k + aux;
  std::complex<double> mixed = 1.0 + z * std::conj(w);
  double logmag = K * std::log(std::abs(mixed)) -
                  0.5 * K * std::log1p(std::norm(z)) -
                  0.5 * K * std::log1p(std::norm(w));
  if (std::abs(mixed) == 0.0) return 0.0;
  return (K + 1) / (2 * M_PI) * std::exp(logmag);
}

// ---------------------------------------------------------------------------
// product comparison

struct ProductPolicy {
  enum class Kind { FixedOrder, Truncated } kind = Kind::FixedOrder;
  int fixed_n = 0;
  // Truncated: N(k) = floor(eps k) with eps from the default policy unless set
  std::optional<Rat> eps;

  static ProductPolicy fixed(int n) {
    ProductPolicy p;
    p.kind = Kind::FixedOrder;
    p.fixed_n = n;
    return p;
  }
  static ProductPolicy truncated(std::optional<Rat> eps = std::nullopt) {
    ProductPolicy p;
    p.kind = Kind::Truncated;
    p.eps = eps;
    return p;
  }
};

struct ProductRow {
  int k = 0;
  int n_used = 0;
  int n_requested = 0;
  double residual_norm = 0;
  double residual_max = 0;
  double tail_bound = 0;       // certified bound on omitted partial-sum terms
  bool prefix_limited = false; // tail not negligible within the budget
  bool floor_limited = false;
};

struct ProductComparison {
  std::vector<ProductRow> rows;
  std::vector<double> coefficient_sups;  // rigorous sup bounds per level
  double c_fit = 0;
  Rat eps{0};
  LineFit loglog;       // fixed-order mode
  RateFit exponential;  // truncated mode
};

/// Residual table for T_k(f) T_k(g) against partial sums of the multiplier
/// expansion; coefficients come from the exact closed-form pipeline.
inline ProductComparison compare_product(const OracleSymbol& f,
                                         const OracleSymbol& g,
                                         const ProductPolicy& policy,
                                         const std::vector<int>& k_list, int aux,
                                         int n_budget = 12) {
  f.validate();
  g.validate();
  int levels = policy.kind == ProductPolicy::Kind::FixedOrder
                   ? policy.fixed_n
                   : n_budget;
  FsSymbolCalculus calc(aux, levels);
  std::vector<BiRadial> h =
      calc.multiplier_product(f.to_biradial(), g.to_biradial(), levels);

  ProductComparison out;
  // rigorous sup bounds: weight-m terms obey |z^m| (1+t)^(-d) <= 1 on the
  // line when d >= |m| (checked by the Toeplitz builder anyway)
  for (auto& hl : h) {
    double s = 0;
    for (auto& [key, c] : hl.terms()) s += abs_double(c);
    out.coefficient_sups.push_back(s);
  }

  if (policy.kind == ProductPolicy::Kind::Truncated) {
    // the default policy eps = 1/(2 C) from the sup norms of the prefix
    NormedSymbol ns = NormedSymbol::from_norms(out.coefficient_sups);
    out.c_fit = fit_factorial_growth(ns);
    out.eps = policy.eps ? *policy.eps : default_truncation_eps(out.c_fit);
  }

  // geometric extrapolation of the sup bounds for tail certification
  double growth = 2.0;
  for (size_t l = 3; l + 1 < out.coefficient_sups.size(); ++l) {
    if (out.coefficient_sups[l] > 1e-300)
      growth = std::max(growth,
                        out.coefficient_sups[l + 1] / out.coefficient_sups[l]);
  }

  std::vector<std::pair<double, double>> loglog_pts;
  std::vector<std::pair<int, double>> exp_pts;
  for (int k : k_list) {
    ProductRow row;
    row.k = k;
    long nreq = policy.kind == ProductPolicy::Kind::FixedOrder
                    ? policy.fixed_n
                    : floor_rat(out.eps * k);
    row.n_requested = static_cast<int>(nreq);
    row.n_used = static_cast<int>(std::min<long>(nreq, levels));

    ToeplitzMatrix Tf = toeplitz_matrix(f, k, aux);
    ToeplitzMatrix Tg = toeplitz_matrix(g, k, aux);
    const int dim = Tf.dim;

    // exact partial sum accumulated in rationals
    std::vector<std::vector<RatC>> sum(
        static_cast<size_t>(dim),
        std::vector<RatC>(static_cast<size_t>(dim), RatC(Rat(0))));
    Rat kinv = Rat(1) / Rat(k);
    Rat kpow(1);
    for (int l = 0; l <= row.n_used; ++l) {
      ToeplitzMatrix Th =
          toeplitz_of_biradial(h[static_cast<size_t>(l)], k, aux,
                               "product coefficient " + std::to_string(l));
      for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) {
          RatC e = Th.entries[static_cast<size_t>(j)][static_cast<size_t>(i)];
          if (!e.is_zero())
            sum[static_cast<size_t>(j)][static_cast<size_t>(i)] += RatC(kpow) * e;
        }
      kpow *= kinv;
    }

    CMat prod = Tf.to_cmat() * Tg.to_cmat();
    CMat psum(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i)
        psum.at(j, i) = {to_double(sum[static_cast<size_t>(j)][static_cast<size_t>(i)].re),
                         to_double(sum[static_cast<size_t>(j)][static_cast<size_t>(i)].im)};
    CMat res = prod - psum;
    row.residual_norm = operator_norm(res);
    row.residual_max = max_abs_entry(res);

    if (row.n_used < row.n_requested) {
      // certified bound on the omitted terms: the computed sup bounds grow
      // at most geometrically, so the dropped tail is dominated by
      // sum_{l > n_used} (growth/k)^(l - n_used) s_last, with a factor-4
      // safety margin on the extrapolation
      double s_last = out.coefficient_sups.back();
      double q = growth / k;
      double tail = q < 1 ? s_last * q / (1 - q) : 1e300;
      row.tail_bound = 4 * tail;
      row.prefix_limited = row.tail_bound > 2.2e-16;
    }

    if (policy.kind == ProductPolicy::Kind::FixedOrder) {
      if (row.residual_norm > 0)
        loglog_pts.emplace_back(std::log(static_cast<double>(k)),
                                std::log(row.residual_norm));
    } else {
      exp_pts.emplace_back(k, row.residual_norm);
    }
    out.rows.push_back(row);
  }

  if (policy.kind == ProductPolicy::Kind::FixedOrder) {
    out.loglog = fit_line(loglog_pts);
  } else {
    out.exponential = fit_exponential_rate(exp_pts);
    for (auto& row : out.rows)
      row.floor_limited = row.residual_norm <= out.exponential.floor;
  }
  return out;
}

// ---------------------------------------------------------------------------
// covariant coefficients by extrapolation

struct ExtrapolationResult {
  std::vector<RatC> estimates;      // coefficient estimates, exact solve
  std::vector<double> errors;       // window-to-window differences
  double condition = 0;             // double-precision condition proxy
  std::vector<std::pair<int, RatC>> samples;  // (k, u(k)) used
};

/// Diagonal kernel samples u(k) = (2 pi / k) S_k(z, conj z) of T_k(f),
/// extrapolated in 1/k by exact rational Vandermonde solves on sliding
/// windows. Requires radial f unless z = 0.
inline ExtrapolationResult covariant_by_extrapolation(const OracleSymbol& f,
                                                      int cap,
                                                      const std::vector<int>& k_list,
                                                      int aux, const Rat& z) {
  if (static_cast<int>(k_list.size()) < cap + 2)
    throw DomainError("extrapolation needs at least cap + 2 sample powers");
  if (!(z == 0) && !f.radial())
    throw DomainError("off-center extrapolation needs a radial symbol");

  ExtrapolationResult out;
  Rat t = z * z;
  for (int k : k_list) {
    ToeplitzMatrix T = toeplitz_matrix(f, k, aux);
    Cp1Space space = Cp1Space::make(k, aux);
    const int K = k + aux;
    // (2 pi / k) * (1+t)^-K sum_j T_jj z^(2j) / ||z^j||^2, the 2 pi cancels
    RatC acc(Rat(0));
    Rat zp(1);
    for (int j = 0; j < T.dim; ++j) {
      acc += T.entries[static_cast<size_t>(j)][static_cast<size_t>(j)] *
             RatC(zp / space.norms_over_2pi[static_cast<size_t>(j)]);
      zp *= t;
    }
    Rat scale = Rat(1) / (Rat(k) * rat_pow(Rat(1) + t, K));
    out.samples.emplace_back(k, acc * RatC(scale));
  }

  // sliding Vandermonde windows over 1/k, last window wins; guard terms
  // beyond the reported coefficients absorb the series tail
  const int guard = 5;
  const int width = std::min(static_cast<int>(k_list.size()) - 1, cap + 1 + guard);
  auto solve_window = [&](size_t lo) {
    int n = width;
    std::vector<std::vector<RatC>> m(static_cast<size_t>(n),
                                     std::vector<RatC>(static_cast<size_t>(n)));
    std::vector<RatC> rhs(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
      auto& [k, u] = out.samples[lo + static_cast<size_t>(r)];
      Rat x = Rat(1) / Rat(k);
      Rat xp(1);
      for (int c2 = 0; c2 < n; ++c2) {
        m[static_cast<size_t>(r)][static_cast<size_t>(c2)] = RatC(xp);
        xp *= x;
      }
      rhs[static_cast<size_t>(r)] = u;
    }
    // Gaussian elimination, exact
    for (int col = 0; col < n; ++col) {
      int piv = -1;
      for (int r = col; r < n; ++r)
        if (!m[static_cast<size_t>(r)][static_cast<size_t>(col)].is_zero()) {
          piv = r;
          break;
        }
      if (piv < 0) throw DomainError("singular extrapolation system");
      std::swap(m[static_cast<size_t>(col)], m[static_cast<size_t>(piv)]);
      std::swap(rhs[static_cast<size_t>(col)], rhs[static_cast<size_t>(piv)]);
      RatC inv = RatC(Rat(1)) / m[static_cast<size_t>(col)][static_cast<size_t>(col)];
      for (int c2 = col; c2 < n; ++c2)
        m[static_cast<size_t>(col)][static_cast<size_t>(c2)] *= inv;
      rhs[static_cast<size_t>(col)] *= inv;
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        RatC factor = m[static_cast<size_t>(r)][static_cast<size_t>(col)];
        if (factor.is_zero()) continue;
        for (int c2 = col; c2 < n; ++c2)
          m[static_cast<size_t>(r)][static_cast<size_t>(c2)] -=
              factor * m[static_cast<size_t>(col)][static_cast<size_t>(c2)];
        rhs[static_cast<size_t>(r)] -= factor * rhs[static_cast<size_t>(col)];
      }
    }
    return rhs;
  };

  size_t last = out.samples.size() - static_cast<size_t>(width);
  auto final_est = solve_window(last);
  auto prev_est = solve_window(last - 1);
  out.estimates.assign(final_est.begin(), final_est.begin() + cap + 1);
  for (int i = 0; i <= cap; ++i)
    out.errors.push_back(abs_double(RatC(final_est[static_cast<size_t>(i)] -
                                         prev_est[static_cast<size_t>(i)])));

  // condition proxy of the final window in double precision
  double xmin = 1.0 / k_list.back(), xmax = 1.0 / k_list[last];
  out.condition = std::pow((xmax + xmin) / (xmax - xmin), width);
  return out;
}

// ---------------------------------------------------------------------------
// off-diagonal decay

struct OffdiagResult {
  RateFit fit;
  double reference = 0;  // -log |E(z, w)|
  std::vector<std::pair<int, double>> samples;
};

/// Decay rate of the prefactor-normalized kernel magnitude
/// |Pi_k(z, conj w)| 2 pi / (K+1) against k, with the section-norm value
/// from the geometry module as the reference.
inline OffdiagResult offdiagonal_decay_rate(const RatC& z, const RatC& w, int aux,
                                            const std::vector<int>& k_list) {
  std::complex<double> zd(to_double(z.re), to_double(z.im));
  std::complex<double> wd(to_double(w.re), to_double(w.im));
  if ((RatC(Rat(1)) + z * w.conj()).is_zero())
    throw DomainError("antipodal pair: the section vanishes identically");
  OffdiagResult out;
  for (int k : k_list) {
    double v = bergman_kernel_value(k, aux, zd, wd) * 2 * M_PI / (k + aux + 1);
    out.samples.emplace_back(k, v);
  }
  out.fit = fit_exponential_rate(out.samples);
  KahlerModel fs = KahlerModel::parse("fs:" + std::to_string(aux));
  out.reference = -log_section_norm(fs, {z}, {w});
  return out;
}

}  // namespace berezin
