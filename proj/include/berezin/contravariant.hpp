#pragma once

// The map B from contravariant (multiplier) symbols to non-normalized
// covariant symbols, and its inverse. Each level acts on a jet f by
//   B_l(f) = sum_{p+q+r=l} P_p( rho_q(x, y+v) f(x+u, y+v) rho_r(x+u, y) ),
// with P_p the Laplace level functionals; level 0 is the identity. The
// inverse is computed by order-by-order operator-series inversion.

#include "berezin/bergman.hpp"

namespace berezin {

/// Per-(model, base) data needed to apply the covariant map levels:
/// the Laplace engine plus the unit-symbol jets.
template <class K>
class CovariantMap {
 public:
  CovariantMap(const KahlerModel& model, const BasePoint& base, int max_level,
               int xy_order)
      : engine_(model, base, max_level, xy_order),
        rho_(bergman_symbol<K>(model, base, max_level, xy_order + max_level)) {}

  const KahlerModel& model() const { return engine_.model(); }
  const BasePoint& base() const { return engine_.base(); }
  int max_level() const { return engine_.max_level(); }
  int xy_order() const { return engine_.xy_order(); }
  LaplaceEngine<K>& engine() { return engine_; }
  const BergmanSymbol<K>& unit_symbol() const { return rho_; }

  /// B_level(f) as an (x,y)-jet of order out_order. Exact requirement:
  /// f of order >= out_order + 2*level.
  Jet<K> apply_term(const Jet<K>& f, int level, int out_order) {
    const int need = out_order + 2 * level;
    if (f.cap() < need)
      throw OrderError("jet too shallow for this covariant level", need, f.cap());
    if (level > engine_.max_level())
      throw OrderError("covariant map built with too small a level", level,
                       engine_.max_level());
    const int n = model().n;
    auto L4 = layout_xyuv(n);
    Jet<K> acc(layout_xy(n), out_order);

    for (int q = 0; q <= level; ++q)
      for (int r = 0; q + r <= level; ++r) {
        const int p = level - q - r;
        GroupCaps vbox, ubox, box;
        vbox[Group::V] = p;
        ubox[Group::U] = p;
        box[Group::U] = p;
        box[Group::V] = p;
        box.xy = out_order;
        const int cap4 = 2 * p + out_order;

        Jet<K> f4 = shift_group(
            shift_group(embed(f, L4, f.cap()), Group::Y, Group::V, vbox),
            Group::X, Group::U, box);
        Jet<K> rq = shift_group(embed(rho_.rho[static_cast<size_t>(q)], L4,
                                      rho_.rho[static_cast<size_t>(q)].cap()),
                                Group::Y, Group::V, vbox)
                        .truncated(cap4, box);
        Jet<K> rr = shift_group(embed(rho_.rho[static_cast<size_t>(r)], L4,
                                      rho_.rho[static_cast<size_t>(r)].cap()),
                                Group::X, Group::U, ubox)
                        .truncated(cap4, box);
        Jet<K> d = mul(mul(rq, f4, cap4, box), rr, cap4, box);
        acc += engine_.functional_jet(d, p, out_order);
      }
    return acc;
  }

  /// B^{-1} at one level applied through the triangular operator recursion:
  /// inv_0 = id, inv_c(f) = -sum_{l=1..c} B_l(inv_{c-l}(f)).
  /// Returns all of inv_0(f)..inv_top(f) at once; inv_j comes out with order
  /// out_order + 2*(top - j) consumed from below.
  std::vector<Jet<K>> inverse_chain(const Jet<K>& f, int top, int out_order) {
    const int need = out_order + 2 * top;
    if (f.cap() < need)
      throw OrderError("jet too shallow for the inverse chain", need, f.cap());
    std::vector<Jet<K>> g;
    g.push_back(f);
    for (int c = 1; c <= top; ++c) {
      int ord = out_order + 2 * (top - c);
      Jet<K> acc(layout_xy(model().n), ord);
      for (int l = 1; l <= c; ++l)
        acc -= apply_term(g[static_cast<size_t>(c - l)], l, ord);
      g.push_back(std::move(acc));
    }
    return g;
  }

 private:
  LaplaceEngine<K> engine_;
  BergmanSymbol<K> rho_;
};

/// Scalar value of B_level(f) at the base.
template <class K>
K covariant_term_value(const KahlerModel& m, const BasePoint& p, const Jet<K>& f,
                       int level) {
  CovariantMap<K> map(m, p, level, 0);
  return map.apply_term(f, level, 0).constant_term();
}

/// B applied to a symbol prefix: (BF)_c = sum_{l+m=c} B_l(F_m).
template <class K>
SymbolPrefix<K> to_covariant(const KahlerModel& m, const BasePoint& p,
                             const SymbolPrefix<K>& F, int cap) {
  int max_order = 0;
  for (int c = 0; c <= cap; ++c)
    for (int l = 0; l <= c; ++l) {
      int mm = c - l;
      if (mm > F.levels()) continue;
      max_order = std::max(max_order, F.at(mm).cap() - 2 * l);
    }
  CovariantMap<K> map(m, p, cap, std::max(0, max_order));
  SymbolPrefix<K> G;
  for (int c = 0; c <= cap; ++c) {
    int ord = -1;
    for (int l = 0; l <= c; ++l) {
      int mm = c - l;
      if (mm > F.levels()) continue;
      int avail = F.at(mm).cap() - 2 * l;
      ord = ord < 0 ? avail : std::min(ord, avail);
    }
    if (ord < 0)
      throw OrderError("symbol coefficients too shallow for the covariant map",
                       2 * c, 0);
    Jet<K> g(layout_xy(m.n), ord);
    for (int l = 0; l <= c; ++l) {
      int mm = c - l;
      if (mm > F.levels()) continue;
      g += map.apply_term(F.at(mm), l, ord);
    }
    G.coeff.push_back(std::move(g));
  }
  return G;
}

/// The inverse map: returns G with B(G) = F modulo the semiclassical order.
template <class K>
SymbolPrefix<K> from_covariant(const KahlerModel& m, const BasePoint& p,
                               const SymbolPrefix<K>& F, int cap) {
  int max_order = 0;
  for (int mm = 0; mm <= std::min(cap, F.levels()); ++mm)
    max_order = std::max(max_order, F.at(mm).cap());
  CovariantMap<K> map(m, p, cap, std::max(0, max_order));

  // order-by-order triangular solve: G_c = F_c - sum_{l=1..c} B_l(G_{c-l})
  SymbolPrefix<K> G;
  for (int c = 0; c <= cap; ++c) {
    int ord = -1;
    for (int j = 0; j <= c; ++j) {
      if (j > F.levels()) continue;
      int avail = F.at(j).cap() - 2 * (c - j);
      ord = ord < 0 ? avail : std::min(ord, avail);
    }
    if (ord < 0)
      throw OrderError("symbol coefficients too shallow for the inverse map",
                       2 * c, 0);
    Jet<K> g = c <= F.levels() ? F.at(c).truncated(ord)
                               : Jet<K>(layout_xy(m.n), ord);
    for (int l = 1; l <= c; ++l)
      g -= map.apply_term(G.coeff[static_cast<size_t>(c - l)], l, ord);
    G.coeff.push_back(std::move(g));
  }
  return G;
}

/// Coefficient tables b_{l,alpha,beta} of the differential operators B_l
/// (or of the inverse levels when `of_inverse`), extracted by applying the
/// operators to centered monomial jets.
template <class K>
std::map<std::tuple<int, MultiIndex, MultiIndex>, K> covariant_term_coefficients(
    CovariantMap<K>& map, int max_level, bool of_inverse = false) {
  const int n = map.model().n;
  auto Lxy = layout_xy(n);
  std::map<std::tuple<int, MultiIndex, MultiIndex>, K> table;

  std::vector<MultiIndex> idx;
  MultiIndex cur(n, 0);
  std::function<void(int, int)> gen = [&](int pos, int left) {
    if (pos == n) {
      idx.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[pos] = static_cast<uint16_t>(e);
      gen(pos + 1, left - e);
    }
    cur[pos] = 0;
  };
  gen(0, max_level);

  for (auto& alpha : idx)
    for (auto& beta : idx) {
      int deg = order_of(alpha) + order_of(beta);
      // one monomial probe serves every level
      Jet<K> mono(Lxy, std::max(deg, 2 * max_level));
      MultiIndex mi(Lxy.vars(), 0);
      for (int i = 0; i < n; ++i) {
        mi[Lxy.var(Group::X, i)] = alpha[i];
        mi[Lxy.var(Group::Y, i)] = beta[i];
      }
      mono.set_coeff(mi, K(1));
      Rat fct(1);
      for (int i = 0; i < n; ++i) fct *= factorial(alpha[i]) * factorial(beta[i]);
      K norm = ScalarMode<K>::from_rational(RatC(Rat(1) / fct));

      if (of_inverse) {
        auto chain = map.inverse_chain(mono, max_level, 0);
        for (int l = 0; l <= max_level; ++l) {
          if (order_of(alpha) > l || order_of(beta) > l) continue;
          K v = chain[static_cast<size_t>(l)].constant_term() * norm;
          if (!v.is_zero()) table[{l, alpha, beta}] = v;
        }
      } else {
        for (int l = 0; l <= max_level; ++l) {
          if (order_of(alpha) > l || order_of(beta) > l) continue;
          K v = map.apply_term(mono, l, 0).constant_term() * norm;
          if (!v.is_zero()) table[{l, alpha, beta}] = v;
        }
      }
    }
  return table;
}

}  // namespace berezin
