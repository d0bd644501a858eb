#pragma once

// The Laplace-expansion machinery behind the symbol product: the level
// functionals P_l acting on (u,v)-jets, the bidifferential coefficients
// a_{l,alpha,beta} = P_l(u^alpha v^beta)/l!, the bidifferential values
// A_l(f,g), the star product on symbol prefixes, and growth-constant scans.
//
// Two independent routes compute A_l(f,g): the direct route applies P_l to
// d(u,v) = f(x, y+v) g(x+u, y), and the table route expands through the
// coefficients a_{l,alpha,beta}. Tests pin their agreement.

#include <functional>
#include <map>
#include <tuple>
#include <vector>

#include "berezin/geometry.hpp"

namespace berezin {

/// A finite prefix a_0..a_N of a formal series in the semiclassical
/// parameter, with jet coefficients sharing one base and layout.
template <class K>
struct SymbolPrefix {
  std::vector<Jet<K>> coeff;

  SymbolPrefix() = default;
  explicit SymbolPrefix(std::vector<Jet<K>> c) : coeff(std::move(c)) {}

  static SymbolPrefix constant(const VariableLayout& L, int cap, const K& v) {
    return SymbolPrefix({Jet<K>::constant(L, cap, v)});
  }

  int levels() const { return static_cast<int>(coeff.size()) - 1; }

  const Jet<K>& at(int i) const {
    static const Jet<K> nothing;
    if (i < 0 || i >= static_cast<int>(coeff.size())) return nothing;
    return coeff[static_cast<size_t>(i)];
  }
};

/// Values a_{l,alpha,beta} at a base point, |alpha|,|beta| <= l <= max_level.
/// Absent entries are zero; the (0,0,0) entry is always 1.
template <class K>
struct BidiffCoefficientTable {
  KahlerModel model;
  BasePoint base;
  int max_level = 0;
  std::map<std::tuple<int, MultiIndex, MultiIndex>, K> entries;

  K value(int level, const MultiIndex& alpha, const MultiIndex& beta) const {
    auto it = entries.find({level, alpha, beta});
    return it == entries.end() ? K(0) : it->second;
  }
};

/// Shared per-(model, base) machinery: the powers R_m = c^m * c' as
/// four-variable jets, the metric jets, and coefficient-jet caches.
template <class K>
class LaplaceEngine {
 public:
  LaplaceEngine(const KahlerModel& model, const BasePoint& base, int max_level,
                int xy_order)
      : model_(model), base_(base), max_level_(max_level), xy_order_(xy_order) {
    if (max_level < 0) throw OrderError("negative expansion level", 0, max_level);
    const int ucap = max_level + 1;
    phase_ = make_phase_jets<K>(model, base, ucap, xy_order);
    const int n = model.n;
    L4_ = layout_xyuv(n);
    Lxy_ = layout_xy(n);

    // R_m = c^m * c', capped per variable group at (max_level + m)
    r_.reserve(2 * max_level + 1);
    r_.push_back(truncate_uv(phase_.cprime, max_level));
    for (int m = 1; m <= 2 * max_level; ++m) {
      GroupCaps gc = box_for(max_level + m);
      r_.push_back(mul(r_.back(), phase_.c, cap4(max_level + m), gc));
    }

    if (n == 1) {
      ginv_pow_.push_back(Jet<K>::constant(Lxy_, xy_order_, K(1)));
      for (int p = 1; p <= 3 * max_level; ++p)
        ginv_pow_.push_back(
            mul(ginv_pow_.back(), phase_.metric_inv_xy[0][0], xy_order_));
    }
  }

  const KahlerModel& model() const { return model_; }
  const BasePoint& base() const { return base_; }
  int max_level() const { return max_level_; }
  int xy_order() const { return xy_order_; }
  const PhaseJets<K>& phase() const { return phase_; }

  /// P_level(d) as an (x,y)-jet of order `out_order`; d is a jet in the
  /// four-variable layout (its u,v degrees up to `level` matter).
  Jet<K> functional_jet(const Jet<K>& d, int level, int out_order) {
    require_level(level);
    if (out_order > xy_order_)
      throw OrderError("engine built with too small an (x,y) order", out_order,
                       xy_order_);
    Jet<K> acc(Lxy_, out_order);
    const int n = model_.n;
    for (int m = 0; m <= 2 * level; ++m) {
      const int p = level + m;
      Jet<K> slice = delta_power_slice(r_[static_cast<size_t>(m)], d, p, out_order);
      if (slice.is_zero()) continue;
      // 1 / (m! (level+m)!) times the delta-power factor folded below
      slice.scale(ScalarMode<K>::from_rational(
          RatC(Rat(1) / (factorial(m) * factorial(p)))));
      acc += slice;
    }
    Jet<K> b = (n == 1) ? phase_.b_xy.truncated(out_order)
                        : Jet<K>::constant(Lxy_, out_order,
                                           phase_.b_xy.constant_term());
    return mul(acc, b, out_order);
  }

  /// Scalar value of P_level(d) at the base.
  K functional_value(const Jet<K>& d, int level) {
    return functional_jet(d, level, 0).constant_term();
  }

  /// a_{level,alpha,beta} as an (x,y)-jet (the P_level(u^alpha v^beta)/level!
  /// coefficient functions).
  Jet<K> entry_jet(int level, const MultiIndex& alpha, const MultiIndex& beta,
                   int out_order) {
    require_level(level);
    if (order_of(alpha) > level || order_of(beta) > level)
      return Jet<K>(Lxy_, std::max(out_order, 0));
    auto key = std::make_tuple(level, alpha, beta, out_order);
    auto it = entry_cache_.find(key);
    if (it != entry_cache_.end()) return it->second;
    Jet<K> mono(L4_, order_of(alpha) + order_of(beta));
    MultiIndex mi(L4_.vars(), 0);
    const int n = model_.n;
    for (int i = 0; i < n; ++i) {
      mi[L4_.var(Group::U, i)] = alpha[i];
      mi[L4_.var(Group::V, i)] = beta[i];
    }
    mono.set_coeff(mi, K(1));
    Jet<K> j = functional_jet(mono, level, out_order);
    j.scale(ScalarMode<K>::from_rational(RatC(Rat(1) / factorial(level))));
    entry_cache_.emplace(key, j);
    return j;
  }

  K entry_value(int level, const MultiIndex& alpha, const MultiIndex& beta) {
    return entry_jet(level, alpha, beta, 0).constant_term();
  }

 private:
  void require_level(int level) const {
    if (level < 0 || level > max_level_)
      throw OrderError("engine built with too small a level", level, max_level_);
  }

  int cap4(int uv_per_var) const { return 2 * uv_per_var + xy_order_; }

  GroupCaps box_for(int uv_per_var) const {
    GroupCaps gc;
    gc[Group::U] = uv_per_var;
    gc[Group::V] = uv_per_var;
    gc.xy = xy_order_;
    return gc;
  }

  Jet<K> truncate_uv(const Jet<K>& j, int uv_per_var) const {
    return j.truncated(cap4(uv_per_var), box_for(uv_per_var));
  }

  /// (x,y)-jet of Delta^p(R * d) |_{u=v=0} divided by nothing: includes the
  /// (p!)^2-style combinatorial factor of the derivative evaluation and the
  /// metric-inverse coefficients.
  Jet<K> delta_power_slice(const Jet<K>& R, const Jet<K>& d, int p,
                           int out_order) {
    const int n = model_.n;
    if (n == 1) {
      // Delta^p(X)(0,0) = (G^{11})^p (p!)^2 [u^p v^p] X
      Jet<K> xy(Lxy_, out_order);
      // convolve the (u,v) slices of R and d
      for (auto& [mi, c] : d.terms()) {
        int du = mi[L4_.var(Group::U, 0)];
        int dv = mi[L4_.var(Group::V, 0)];
        if (du > p || dv > p) continue;
        MultiIndex want(L4_.vars(), 0);
        want[L4_.var(Group::U, 0)] = static_cast<uint16_t>(p - du);
        want[L4_.var(Group::V, 0)] = static_cast<uint16_t>(p - dv);
        // multiply by every R monomial with that (u,v) part
        auto& bucket = bucket_for(R, p - du, p - dv);
        if (bucket.is_zero()) continue;
        MultiIndex dxy(Lxy_.vars(), 0);
        dxy[0] = mi[L4_.var(Group::X, 0)];
        dxy[1] = mi[L4_.var(Group::Y, 0)];
        if (order_of(dxy) > out_order) continue;
        Jet<K> dmono(Lxy_, out_order);
        dmono.set_coeff(dxy, c);
        xy += mul(bucket, dmono, out_order);
      }
      if (xy.is_zero()) return xy;
      Rat fct = factorial(p) * factorial(p);
      xy.scale(ScalarMode<K>::from_rational(RatC(fct)));
      return mul(xy, ginv_pow_[static_cast<size_t>(p)].truncated(out_order),
                 out_order);
    }
    // generic dimension: built-in models with n > 1 are flat, where the
    // metric is the constant identity
    if (model_.kind != KahlerModel::Kind::Flat)
      throw DomainError("curved models are one-dimensional in this build");
    GroupCaps gc;
    gc[Group::U] = p;
    gc[Group::V] = p;
    gc.xy = out_order;
    Jet<K> prod = mul(R, d, 2 * p + out_order, gc);
    std::vector<std::vector<K>> id(n, std::vector<K>(n, K(0)));
    for (int i = 0; i < n; ++i) id[i][i] = K(1);
    Jet<K> res = apply_delta_power(prod, id, p);
    // evaluate at u = v = 0, keep (x,y)
    Jet<K> out(Lxy_, out_order);
    for (auto& [mi, c] : res.terms()) {
      bool uv0 = true;
      for (int i = 0; i < n && uv0; ++i)
        uv0 = mi[L4_.var(Group::U, i)] == 0 && mi[L4_.var(Group::V, i)] == 0;
      if (!uv0) continue;
      MultiIndex dxy(Lxy_.vars(), 0);
      for (int i = 0; i < n; ++i) {
        dxy[Lxy_.var(Group::X, i)] = mi[L4_.var(Group::X, i)];
        dxy[Lxy_.var(Group::Y, i)] = mi[L4_.var(Group::Y, i)];
      }
      if (order_of(dxy) <= out_order) out.add_coeff(dxy, c);
    }
    return out;
  }

  /// All monomials of R with exact u-degree du and v-degree dv, as an
  /// (x,y)-jet (dimension one only). Buckets are cached per R identity.
  const Jet<K>& bucket_for(const Jet<K>& R, int du, int dv) {
    auto* key = &R;
    auto& buckets = bucket_cache_[key];
    if (buckets.empty()) {
      for (auto& [mi, c] : R.terms()) {
        int u = mi[L4_.var(Group::U, 0)];
        int v = mi[L4_.var(Group::V, 0)];
        MultiIndex dxy(2, 0);
        dxy[0] = mi[L4_.var(Group::X, 0)];
        dxy[1] = mi[L4_.var(Group::Y, 0)];
        auto [it, fresh] = buckets.try_emplace(std::make_pair(u, v),
                                               Jet<K>(Lxy_, xy_order_));
        if (order_of(dxy) <= xy_order_) it->second.add_coeff(dxy, c);
        (void)fresh;
      }
    }
    static const Jet<K> empty_placeholder;
    auto it = buckets.find(std::make_pair(du, dv));
    if (it == buckets.end()) {
      auto [jt, ins] = buckets.try_emplace(std::make_pair(du, dv),
                                           Jet<K>(Lxy_, xy_order_));
      (void)ins;
      return jt->second;
    }
    return it->second;
  }

  KahlerModel model_;
  BasePoint base_;
  int max_level_;
  int xy_order_;
  PhaseJets<K> phase_;
  VariableLayout L4_, Lxy_;
  std::vector<Jet<K>> r_;
  std::vector<Jet<K>> ginv_pow_;
  std::map<std::tuple<int, MultiIndex, MultiIndex, int>, Jet<K>> entry_cache_;
  std::map<const Jet<K>*, std::map<std::pair<int, int>, Jet<K>>> bucket_cache_;
};

// ---------------------------------------------------------------------------
// direct-route inputs

/// d(u,v) = f(x, y+v) g(x+u, y) as a four-variable jet around the base, with
/// (x,y)-order xy_order and per-variable (u,v) degrees up to uv_order.
template <class K>
Jet<K> product_input_jet(const Jet<K>& f, const Jet<K>& g, int uv_order,
                         int xy_order) {
  f.require_same_layout(g);
  const int n = f.layout().dim;
  auto L4 = layout_xyuv(n);
  GroupCaps vbox, ubox, box;
  vbox[Group::V] = uv_order;
  ubox[Group::U] = uv_order;
  box[Group::U] = uv_order;
  box[Group::V] = uv_order;
  box.xy = xy_order;
  const int cap = 2 * uv_order + xy_order;
  Jet<K> f4 = shift_group(embed(f, L4, cap), Group::Y, Group::V, vbox);
  Jet<K> g4 = shift_group(embed(g, L4, cap), Group::X, Group::U, ubox);
  return mul(f4, g4, cap, box);
}

// ---------------------------------------------------------------------------
// public operations

/// Scalar value of the level functional applied to a (u,v)-jet at the base.
/// The exact input requirement is cap >= 2*level (the u,v degrees up to
/// `level` in each variable influence the result).
template <class K>
K apply_laplace_functional(const KahlerModel& m, const BasePoint& p,
                           const Jet<K>& d, int level) {
  if (d.cap() < 2 * level)
    throw OrderError("input jet cap too small for this level", 2 * level, d.cap());
  LaplaceEngine<K> engine(m, p, level, 0);
  // embed the (u,v) jet into the engine layout
  Jet<K> d4 = embed(d, layout_xyuv(m.n), d.cap());
  return engine.functional_value(d4, level);
}

/// a_{level,alpha,beta} at the base.
template <class K>
K bidiff_coefficient(const KahlerModel& m, const BasePoint& p, int level,
                     const MultiIndex& alpha, const MultiIndex& beta) {
  if (static_cast<int>(alpha.size()) != m.n || static_cast<int>(beta.size()) != m.n)
    throw LayoutError("multi-index length does not match the model dimension");
  if (order_of(alpha) > level || order_of(beta) > level)
    throw DomainError("bidiff coefficient index out of admissible range");
  LaplaceEngine<K> engine(m, p, level, 0);
  return engine.entry_value(level, alpha, beta);
}

/// A_level(f, g) at the base via the direct route. f, g are (x,y)-jets of
/// order >= level.
template <class K>
K bidiff_value(const KahlerModel& m, const BasePoint& p, const Jet<K>& f,
               const Jet<K>& g, int level) {
  if (f.cap() < level || g.cap() < level)
    throw OrderError("input jets too shallow for this level", level,
                     std::min(f.cap(), g.cap()));
  LaplaceEngine<K> engine(m, p, level, 0);
  Jet<K> d = product_input_jet(f, g, level, 0);
  return engine.functional_value(d, level);
}

/// A_level(f, g) as an (x,y)-jet of order out_order, expanded through the
/// coefficient table. Requires f, g of order >= out_order + level.
template <class K>
Jet<K> bidiff_value_jet(LaplaceEngine<K>& engine, const Jet<K>& f,
                        const Jet<K>& g, int level, int out_order) {
  const int need = out_order + level;
  if (f.cap() < need || g.cap() < need)
    throw OrderError("input jets too shallow for this level and order", need,
                     std::min(f.cap(), g.cap()));
  const int n = engine.model().n;
  auto Lxy = layout_xy(n);
  Jet<K> acc(Lxy, out_order);

  // enumerate alpha, beta with |alpha|,|beta| <= level
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
  gen(0, level);

  for (auto& alpha : idx)
    for (auto& beta : idx) {
      Jet<K> entry = engine.entry_jet(level, alpha, beta, out_order);
      if (entry.is_zero()) continue;
      Jet<K> df = derive_multi(f, Group::Y, beta).truncated(out_order);
      if (df.is_zero()) continue;
      Jet<K> dg = derive_multi(g, Group::X, alpha).truncated(out_order);
      if (dg.is_zero()) continue;
      Rat fct(1);
      for (int i = 0; i < n; ++i)
        fct *= factorial(alpha[i]) * factorial(beta[i]);
      Jet<K> term = mul(entry, mul(df, dg, out_order), out_order);
      term.scale(ScalarMode<K>::from_rational(RatC(Rat(1) / fct)));
      acc += term;
    }
  acc.scale(ScalarMode<K>::from_rational(RatC(factorial(level))));
  return acc;
}

/// The full coefficient table up to max_level at one base.
template <class K>
BidiffCoefficientTable<K> build_coefficient_table(const KahlerModel& m,
                                                  const BasePoint& p,
                                                  int max_level) {
  LaplaceEngine<K> engine(m, p, max_level, 0);
  BidiffCoefficientTable<K> t;
  t.model = m;
  t.base = p;
  t.max_level = max_level;
  const int n = m.n;
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
  for (int l = 0; l <= max_level; ++l)
    for (auto& alpha : idx) {
      if (order_of(alpha) > l) continue;
      for (auto& beta : idx) {
        if (order_of(beta) > l) continue;
        K v = engine.entry_value(l, alpha, beta);
        if (!v.is_zero()) t.entries[{l, alpha, beta}] = v;
      }
    }
  return t;
}

/// Star product of two symbol prefixes to the given semiclassical order.
/// Coefficient jets shrink in order with the level, tracked exactly.
template <class K>
SymbolPrefix<K> star_product(const KahlerModel& m, const BasePoint& p,
                             const SymbolPrefix<K>& F, const SymbolPrefix<K>& G,
                             int cap) {
  // the deepest-needed output order determines the engine size
  int max_order = 0;
  for (int c = 0; c <= cap; ++c)
    for (int l = 0; l <= c; ++l)
      for (int mm = 0; mm + l <= c; ++mm) {
        int pp = c - l - mm;
        if (mm > F.levels() || pp > G.levels()) continue;
        int avail = std::min(F.at(mm).cap(), G.at(pp).cap()) - l;
        if (avail < 0)
          throw OrderError("symbol coefficients too shallow for star product", l,
                           std::min(F.at(mm).cap(), G.at(pp).cap()));
        max_order = std::max(max_order, avail);
      }

  LaplaceEngine<K> engine(m, p, cap, max_order);
  SymbolPrefix<K> H;
  auto Lxy = layout_xy(m.n);
  for (int c = 0; c <= cap; ++c) {
    // achievable order for this coefficient
    int ord = -1;
    for (int l = 0; l <= c; ++l)
      for (int mm = 0; mm + l <= c; ++mm) {
        int pp = c - l - mm;
        if (mm > F.levels() || pp > G.levels()) continue;
        int avail = std::min(F.at(mm).cap(), G.at(pp).cap()) - l;
        ord = (ord < 0) ? avail : std::min(ord, avail);
      }
    if (ord < 0) {
      H.coeff.push_back(Jet<K>(Lxy, 0));
      continue;
    }
    Jet<K> h(Lxy, ord);
    for (int l = 0; l <= c; ++l)
      for (int mm = 0; mm + l <= c; ++mm) {
        int pp = c - l - mm;
        if (mm > F.levels() || pp > G.levels()) continue;
        const Jet<K>&fm = F.at(mm), &gp = G.at(pp);
        if (fm.is_zero() || gp.is_zero()) continue;
        h += bidiff_value_jet(engine, fm, gp, l, ord);
      }
    H.coeff.push_back(std::move(h));
  }
  return H;
}

/// Growth scan for the coefficient table: C = max |a|^(1/(l+1)) over all
/// entries and bases, with per-level maxima reported.
struct GrowthScan {
  double c_fit = 0;
  std::vector<double> per_level_max;  // max |a| at each level
  std::vector<double> per_level_c;    // max |a|^(1/(l+1)) at each level
};

template <class K>
GrowthScan fit_coefficient_growth(const KahlerModel& m,
                                  const std::vector<BasePoint>& bases,
                                  int max_level) {
  GrowthScan out;
  out.per_level_max.assign(static_cast<size_t>(max_level) + 1, 0.0);
  out.per_level_c.assign(static_cast<size_t>(max_level) + 1, 0.0);
  for (auto& p : bases) {
    BidiffCoefficientTable<K> t = build_coefficient_table<K>(m, p, max_level);
    for (auto& [key, v] : t.entries) {
      int l = std::get<0>(key);
      double a = abs_double(v);
      out.per_level_max[l] = std::max(out.per_level_max[l], a);
    }
  }
  for (int l = 0; l <= max_level; ++l) {
    double c = std::pow(out.per_level_max[l], 1.0 / (l + 1));
    out.per_level_c[l] = c;
    out.c_fit = std::max(out.c_fit, c);
  }
  return out;
}

}  // namespace berezin
