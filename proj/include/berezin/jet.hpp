#pragma once

// Truncated multivariate power series ("jets") over exact rational or
// high-precision float complex coefficients. Variables come in up to four
// named groups of equal size n: x, y (conjugate slot), u, v. A jet stores a
// sparse coefficient map and a total-degree cap; every stored multi-index
// has order <= cap, and an absent index means the coefficient is zero.

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "berezin/scalar.hpp"

namespace berezin {

enum class Group : uint8_t { X = 0, Y = 1, U = 2, V = 3 };

inline char group_letter(Group g) {
  switch (g) {
    case Group::X: return 'x';
    case Group::Y: return 'y';
    case Group::U: return 'u';
    case Group::V: return 'v';
  }
  return '?';
}

using MultiIndex = std::vector<uint16_t>;

inline int order_of(const MultiIndex& mi) {
  int s = 0;
  for (auto e : mi) s += e;
  return s;
}

/// Ordered variable groups of common size `dim`.
struct VariableLayout {
  int dim = 1;
  std::vector<Group> groups;

  VariableLayout() = default;
  VariableLayout(int n, std::vector<Group> gs) : dim(n), groups(std::move(gs)) {
    for (size_t i = 0; i < groups.size(); ++i)
      for (size_t j = i + 1; j < groups.size(); ++j)
        if (groups[i] == groups[j]) throw LayoutError("duplicate variable group");
  }

  int vars() const { return dim * static_cast<int>(groups.size()); }

  bool has(Group g) const {
    return std::find(groups.begin(), groups.end(), g) != groups.end();
  }

  int group_pos(Group g) const {
    for (size_t i = 0; i < groups.size(); ++i)
      if (groups[i] == g) return static_cast<int>(i);
    throw LayoutError(std::string("layout has no group '") + group_letter(g) + "'");
  }

  /// Flat index of variable i of group g.
  int var(Group g, int i) const {
    if (i < 0 || i >= dim) throw LayoutError("variable index out of range");
    return group_pos(g) * dim + i;
  }

  std::string var_name(int flat) const {
    Group g = groups[flat / dim];
    if (dim == 1) return std::string(1, group_letter(g));
    return std::string(1, group_letter(g)) + std::to_string(flat % dim + 1);
  }

  int group_degree(const MultiIndex& mi, Group g) const {
    int p = group_pos(g) * dim, s = 0;
    for (int i = 0; i < dim; ++i) s += mi[p + i];
    return s;
  }

  friend bool operator==(const VariableLayout& a, const VariableLayout& b) {
    return a.dim == b.dim && a.groups == b.groups;
  }
};

inline VariableLayout layout_xy(int n = 1) {
  return VariableLayout(n, {Group::X, Group::Y});
}
inline VariableLayout layout_uv(int n = 1) {
  return VariableLayout(n, {Group::U, Group::V});
}
inline VariableLayout layout_xyuv(int n = 1) {
  return VariableLayout(n, {Group::X, Group::Y, Group::U, Group::V});
}

/// Per-group degree limits applied on top of the total cap; -1 = unlimited.
/// `xy` and `uv` bound the joint degree of the (x,y) and (u,v) pairs.
struct GroupCaps {
  std::array<int, 4> max{-1, -1, -1, -1};
  int xy = -1;
  int uv = -1;
  int& operator[](Group g) { return max[static_cast<int>(g)]; }
  int operator[](Group g) const { return max[static_cast<int>(g)]; }
  bool trivial() const {
    return max == std::array<int, 4>{-1, -1, -1, -1} && xy < 0 && uv < 0;
  }
};

template <class K>
class Jet {
 public:
  Jet() : layout_(), cap_(0) {}
  Jet(VariableLayout layout, int cap) : layout_(std::move(layout)), cap_(cap) {
    if (cap < 0) throw OrderError("negative jet cap", 0, cap);
  }

  static Jet constant(const VariableLayout& layout, int cap, const K& value) {
    Jet j(layout, cap);
    if (!value.is_zero()) j.coeffs_[MultiIndex(layout.vars(), 0)] = value;
    return j;
  }

  static Jet variable(const VariableLayout& layout, int cap, Group g, int i = 0) {
    if (cap < 1) throw OrderError("cap too small for a variable jet", 1, cap);
    Jet j(layout, cap);
    MultiIndex mi(layout.vars(), 0);
    mi[layout.var(g, i)] = 1;
    j.coeffs_[mi] = K(1);
    return j;
  }

  const VariableLayout& layout() const { return layout_; }
  int cap() const { return cap_; }
  const std::map<MultiIndex, K>& terms() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  size_t size() const { return coeffs_.size(); }

  K coeff(const MultiIndex& mi) const {
    auto it = coeffs_.find(mi);
    return it == coeffs_.end() ? K(0) : it->second;
  }

  K constant_term() const { return coeff(MultiIndex(layout_.vars(), 0)); }

  void set_coeff(const MultiIndex& mi, const K& value) {
    if (static_cast<int>(mi.size()) != layout_.vars())
      throw LayoutError("multi-index length does not match layout");
    if (order_of(mi) > cap_) {
      if (!value.is_zero())
        throw OrderError("multi-index order exceeds jet cap", order_of(mi), cap_);
      return;
    }
    if (value.is_zero())
      coeffs_.erase(mi);
    else
      coeffs_[mi] = value;
  }

  void add_coeff(const MultiIndex& mi, const K& value) {
    if (order_of(mi) > cap_ || value.is_zero()) return;
    auto [it, fresh] = coeffs_.emplace(mi, value);
    if (!fresh) {
      it->second += value;
      if (it->second.is_zero()) coeffs_.erase(it);
    }
  }

  /// Highest total degree actually present.
  int degree() const {
    int d = 0;
    for (auto& [mi, c] : coeffs_) d = std::max(d, order_of(mi));
    return d;
  }

  Jet& operator+=(const Jet& o) {
    require_same_layout(o);
    for (auto& [mi, c] : o.coeffs_)
      if (order_of(mi) <= cap_) add_coeff(mi, c);
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    require_same_layout(o);
    for (auto& [mi, c] : o.coeffs_)
      if (order_of(mi) <= cap_) add_coeff(mi, K(-c));
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    Jet r(a.layout_, a.cap_);
    for (auto& [mi, c] : a.coeffs_) r.coeffs_[mi] = -c;
    return r;
  }

  Jet& scale(const K& s) {
    if (s.is_zero()) {
      coeffs_.clear();
      return *this;
    }
    for (auto& [mi, c] : coeffs_) c *= s;
    return *this;
  }
  friend Jet operator*(const K& s, Jet a) { return a.scale(s); }

  friend bool operator==(const Jet& a, const Jet& b) {
    return a.layout_ == b.layout_ && a.coeffs_ == b.coeffs_;
  }

  void require_same_layout(const Jet& o) const {
    if (!(layout_ == o.layout_)) throw LayoutError("jet layout mismatch");
  }

  /// Copy truncated to a (possibly smaller) cap and optional group caps.
  Jet truncated(int cap, const GroupCaps& gc = {}) const {
    Jet r(layout_, cap);
    for (auto& [mi, c] : coeffs_) {
      if (order_of(mi) > cap) continue;
      if (!gc.trivial() && !within_group_caps(layout_, mi, gc)) continue;
      r.coeffs_[mi] = c;
    }
    return r;
  }

  static bool within_group_caps(const VariableLayout& L, const MultiIndex& mi,
                                const GroupCaps& gc) {
    for (Group g : L.groups) {
      int lim = gc[g];
      if (lim >= 0 && L.group_degree(mi, g) > lim) return false;
    }
    if (gc.xy >= 0) {
      int d = 0;
      if (L.has(Group::X)) d += L.group_degree(mi, Group::X);
      if (L.has(Group::Y)) d += L.group_degree(mi, Group::Y);
      if (d > gc.xy) return false;
    }
    if (gc.uv >= 0) {
      int d = 0;
      if (L.has(Group::U)) d += L.group_degree(mi, Group::U);
      if (L.has(Group::V)) d += L.group_degree(mi, Group::V);
      if (d > gc.uv) return false;
    }
    return true;
  }

 private:
  VariableLayout layout_;
  int cap_;
  std::map<MultiIndex, K> coeffs_;
};

using RatJet = Jet<RatC>;
using FloatJet = Jet<FloatC>;

// ---------------------------------------------------------------------------
// multiplication

/// Truncated product; the result keeps total degree <= cap and, when given,
/// per-group degrees within `gc`.
template <class K>
Jet<K> mul(const Jet<K>& a, const Jet<K>& b, int cap, const GroupCaps& gc = {}) {
  a.require_same_layout(b);
  Jet<K> r(a.layout(), cap);
  if (a.is_zero() || b.is_zero()) return r;
  const Jet<K>& small = a.size() <= b.size() ? a : b;
  const Jet<K>& big = a.size() <= b.size() ? b : a;
  const int nv = a.layout().vars();
  MultiIndex sum(nv, 0);
  for (auto& [mi, ci] : small.terms()) {
    const int oi = order_of(mi);
    if (oi > cap) continue;
    for (auto& [mj, cj] : big.terms()) {
      if (oi + order_of(mj) > cap) continue;
      for (int t = 0; t < nv; ++t) sum[t] = static_cast<uint16_t>(mi[t] + mj[t]);
      if (!gc.trivial() && !Jet<K>::within_group_caps(a.layout(), sum, gc)) continue;
      r.add_coeff(sum, ci * cj);
    }
  }
  return r;
}

template <class K>
Jet<K> mul(const Jet<K>& a, const Jet<K>& b) {
  return mul(a, b, std::min(a.cap(), b.cap()));
}

/// Single coefficient of a*b at `target`, without forming the product.
template <class K>
K product_coeff(const Jet<K>& a, const Jet<K>& b, const MultiIndex& target) {
  a.require_same_layout(b);
  const Jet<K>& small = a.size() <= b.size() ? a : b;
  const Jet<K>& big = a.size() <= b.size() ? b : a;
  const int nv = a.layout().vars();
  K acc(0);
  MultiIndex rest(nv, 0);
  for (auto& [mi, ci] : small.terms()) {
    bool ok = true;
    for (int t = 0; t < nv; ++t) {
      if (mi[t] > target[t]) {
        ok = false;
        break;
      }
      rest[t] = static_cast<uint16_t>(target[t] - mi[t]);
    }
    if (!ok) continue;
    K cj = big.coeff(rest);
    if (!cj.is_zero()) acc += ci * cj;
  }
  return acc;
}

template <class K>
Jet<K> pow_int(const Jet<K>& a, int e, int cap, const GroupCaps& gc = {}) {
  Jet<K> r = Jet<K>::constant(a.layout(), cap, K(1));
  for (int i = 0; i < e; ++i) r = mul(r, a, cap, gc);
  return r;
}

// ---------------------------------------------------------------------------
// series

/// exp(a) truncated at cap; a must have zero constant term.
template <class K>
Jet<K> exp_series(const Jet<K>& a, int cap) {
  if (!a.constant_term().is_zero())
    throw DomainError("exp_series requires a zero constant term");
  Jet<K> r = Jet<K>::constant(a.layout(), cap, K(1));
  Jet<K> term = r;
  for (int m = 1; m <= cap; ++m) {
    term = mul(term, a, cap);
    if (term.is_zero()) break;
    term.scale(ScalarMode<K>::from_rational(RatC(Rat(1) / Rat(m))));
    r += term;
  }
  return r;
}

/// log(1+a) truncated at cap; a must have zero constant term.
template <class K>
Jet<K> log1p_series(const Jet<K>& a, int cap) {
  if (!a.constant_term().is_zero())
    throw DomainError("log1p_series requires a zero constant term");
  Jet<K> r(a.layout(), cap);
  Jet<K> pw = Jet<K>::constant(a.layout(), cap, K(1));
  for (int m = 1; m <= cap; ++m) {
    pw = mul(pw, a, cap);
    if (pw.is_zero()) break;
    Rat c = Rat((m % 2) ? 1 : -1) / Rat(m);
    Jet<K> term = pw;
    term.scale(ScalarMode<K>::from_rational(RatC(c)));
    r += term;
  }
  return r;
}

/// 1/a truncated at cap; the constant term must be invertible.
template <class K>
Jet<K> reciprocal(const Jet<K>& a, int cap) {
  K c0 = a.constant_term();
  if (c0.is_zero()) throw DomainError("reciprocal of a jet with zero constant term");
  K inv0 = K(1) / c0;
  Jet<K> e = a.truncated(cap);
  e.set_coeff(MultiIndex(a.layout().vars(), 0), K(0));
  e.scale(inv0);  // a = c0 (1 + e)
  Jet<K> r = Jet<K>::constant(a.layout(), cap, K(1));
  Jet<K> pw = r;
  for (int m = 1; m <= cap; ++m) {
    pw = mul(pw, e, cap);
    if (pw.is_zero()) break;
    if (m % 2)
      r -= pw;
    else
      r += pw;
  }
  r.scale(inv0);
  return r;
}

// ---------------------------------------------------------------------------
// derivatives

template <class K>
Jet<K> derive(const Jet<K>& a, int var) {
  if (var < 0 || var >= a.layout().vars())
    throw LayoutError("derive: unknown variable");
  Jet<K> r(a.layout(), std::max(0, a.cap() - 1));
  for (auto& [mi, c] : a.terms()) {
    if (mi[var] == 0) continue;
    MultiIndex m2 = mi;
    m2[var] -= 1;
    r.add_coeff(m2, K(static_cast<int>(mi[var])) * c);
  }
  return r;
}

template <class K>
Jet<K> derive(const Jet<K>& a, Group g, int i = 0) {
  return derive(a, a.layout().var(g, i));
}

/// Repeated derivative by a multi-index over one group.
template <class K>
Jet<K> derive_multi(const Jet<K>& a, Group g, const MultiIndex& alpha) {
  Jet<K> r = a;
  for (size_t i = 0; i < alpha.size(); ++i)
    for (int rep = 0; rep < alpha[i]; ++rep) r = derive(r, g, static_cast<int>(i));
  return r;
}

/// One application of sum_ij ginv[i][j] d/du_i d/dv_j.
template <class K>
Jet<K> apply_delta(const Jet<K>& a, const std::vector<std::vector<K>>& ginv) {
  const auto& L = a.layout();
  const int n = L.dim;
  if (static_cast<int>(ginv.size()) != n)
    throw LayoutError("delta: matrix size does not match complex dimension");
  for (auto& row : ginv)
    if (static_cast<int>(row.size()) != n)
      throw LayoutError("delta: matrix size does not match complex dimension");
  Jet<K> r(L, std::max(0, a.cap() - 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (ginv[i][j].is_zero()) continue;
      Jet<K> t = derive(derive(a, Group::U, i), Group::V, j);
      t.scale(ginv[i][j]);
      r += t.truncated(r.cap());
    }
  return r;
}

/// (sum_ij ginv[i][j] d/du_i d/dv_j)^power applied to `a`.
template <class K>
Jet<K> apply_delta_power(const Jet<K>& a, const std::vector<std::vector<K>>& ginv,
                         int power) {
  Jet<K> r = a;
  for (int p = 0; p < power; ++p) r = apply_delta(r, ginv);
  return r;
}

// ---------------------------------------------------------------------------
// layout surgery

/// Re-express a jet in a larger layout (same dim, superset of groups).
template <class K>
Jet<K> embed(const Jet<K>& a, const VariableLayout& target, int cap = -1) {
  if (target.dim != a.layout().dim) throw LayoutError("embed: dimension mismatch");
  for (Group g : a.layout().groups)
    if (!target.has(g)) throw LayoutError("embed: target layout lacks a group");
  if (cap < 0) cap = a.cap();
  Jet<K> r(target, cap);
  const int n = target.dim;
  for (auto& [mi, c] : a.terms()) {
    if (order_of(mi) > cap) continue;
    MultiIndex m2(target.vars(), 0);
    for (size_t gp = 0; gp < a.layout().groups.size(); ++gp) {
      int src = static_cast<int>(gp) * n;
      int dst = target.group_pos(a.layout().groups[gp]) * n;
      for (int i = 0; i < n; ++i) m2[dst + i] = mi[src + i];
    }
    r.add_coeff(m2, c);
  }
  return r;
}

/// Substitute src_i -> src_i + dst_i for every variable of group `src`
/// (binomial re-expansion). Total degree is preserved; group caps, when
/// given, prune the expanded monomials.
template <class K>
Jet<K> shift_group(const Jet<K>& a, Group src, Group dst,
                   const GroupCaps& gc = {}) {
  const auto& L = a.layout();
  if (!L.has(src) || !L.has(dst))
    throw LayoutError("shift_group: group not present in layout");
  const int n = L.dim;
  Jet<K> r(L, a.cap());
  for (auto& [mi, c] : a.terms()) {
    // expand each src variable exponent over (src, dst)
    std::vector<std::pair<MultiIndex, Rat>> acc{{mi, Rat(1)}};
    for (int i = 0; i < n; ++i) {
      int sv = L.var(src, i), dv = L.var(dst, i);
      std::vector<std::pair<MultiIndex, Rat>> next;
      for (auto& [m, w] : acc) {
        int e = m[sv];
        if (e == 0) {
          next.emplace_back(m, w);
          continue;
        }
        for (int b = 0; b <= e; ++b) {
          MultiIndex m2 = m;
          m2[sv] = static_cast<uint16_t>(e - b);
          m2[dv] = static_cast<uint16_t>(m2[dv] + b);
          next.emplace_back(std::move(m2), w * Rat(binomial_long(e, b)));
        }
      }
      acc = std::move(next);
    }
    for (auto& [m, w] : acc) {
      if (!gc.trivial() && !Jet<K>::within_group_caps(L, m, gc)) continue;
      r.add_coeff(m, c * ScalarMode<K>::from_rational(RatC(w)));
    }
  }
  return r;
}

/// Set all variables of a group to zero (keep only degree-0 monomials there).
template <class K>
Jet<K> restrict_zero(const Jet<K>& a, Group g) {
  const auto& L = a.layout();
  Jet<K> r(L, a.cap());
  for (auto& [mi, c] : a.terms())
    if (L.group_degree(mi, g) == 0) r.add_coeff(mi, c);
  return r;
}

/// Rename a group in place (e.g. turn a y-dependence into a v-dependence).
template <class K>
Jet<K> rename_group(const Jet<K>& a, Group from, Group to) {
  const auto& L = a.layout();
  std::vector<Group> gs = L.groups;
  for (auto& g : gs)
    if (g == from) g = to;
  VariableLayout L2(L.dim, gs);
  Jet<K> r(L2, a.cap());
  for (auto& [mi, c] : a.terms()) r.set_coeff(mi, c);
  return r;
}

/// Drop the u and v groups, extracting the coefficient jet of u^alpha v^beta.
/// The result lives in the layout without U, V (typically (x,y)).
template <class K>
Jet<K> uv_coefficient(const Jet<K>& a, const MultiIndex& alpha,
                      const MultiIndex& beta, int out_cap = -1) {
  const auto& L = a.layout();
  const int n = L.dim;
  if (!L.has(Group::U) || !L.has(Group::V))
    throw LayoutError("uv_coefficient: layout lacks u or v");
  std::vector<Group> rest;
  for (Group g : L.groups)
    if (g != Group::U && g != Group::V) rest.push_back(g);
  VariableLayout L2(n, rest);
  if (out_cap < 0) out_cap = a.cap();
  Jet<K> r(L2, out_cap);
  const int up = L.group_pos(Group::U) * n, vp = L.group_pos(Group::V) * n;
  for (auto& [mi, c] : a.terms()) {
    bool match = true;
    for (int i = 0; i < n && match; ++i)
      match = (mi[up + i] == alpha[i]) && (mi[vp + i] == beta[i]);
    if (!match) continue;
    MultiIndex m2(L2.vars(), 0);
    for (size_t gp = 0; gp < rest.size(); ++gp) {
      int src = L.group_pos(rest[gp]) * n;
      for (int i = 0; i < n; ++i) m2[gp * n + i] = mi[src + i];
    }
    if (order_of(m2) <= out_cap) r.add_coeff(m2, c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// evaluation and norms

inline double to_double_re(const RatC& z) { return to_double(z.re); }
inline double to_double_im(const RatC& z) { return to_double(z.im); }
inline double to_double_re(const FloatC& z) { return to_double(z.re); }
inline double to_double_im(const FloatC& z) { return to_double(z.im); }

template <class K>
std::complex<double> eval_at(const Jet<K>& a,
                             const std::vector<std::complex<double>>& point) {
  if (static_cast<int>(point.size()) != a.layout().vars())
    throw LayoutError("eval_at: point size does not match layout");
  std::complex<double> s = 0;
  for (auto& [mi, c] : a.terms()) {
    std::complex<double> t(to_double_re(c), to_double_im(c));
    for (size_t i = 0; i < point.size(); ++i)
      for (int e = 0; e < mi[i]; ++e) t *= point[i];
    s += t;
  }
  return s;
}

/// Max coefficient magnitude; the computable stand-in for sup norms.
template <class K>
double max_abs_coeff(const Jet<K>& a) {
  double m = 0;
  for (auto& [mi, c] : a.terms()) m = std::max(m, abs_double(c));
  return m;
}

template <class K>
Jet<K> convert_jet(const Jet<RatC>& a) {
  Jet<K> r(a.layout(), a.cap());
  for (auto& [mi, c] : a.terms()) r.set_coeff(mi, ScalarMode<K>::from_rational(c));
  return r;
}

template <class K>
std::string to_string(const Jet<K>& a) {
  if (a.is_zero()) return "0";
  std::string s;
  for (auto& [mi, c] : a.terms()) {
    if (!s.empty()) s += " + ";
    s += "(" + to_string(c) + ")";
    for (size_t i = 0; i < mi.size(); ++i) {
      if (mi[i] == 0) continue;
      s += "*" + a.layout().var_name(static_cast<int>(i));
      if (mi[i] > 1) s += "^" + std::to_string(mi[i]);
    }
  }
  return s;
}

}  // namespace berezin
