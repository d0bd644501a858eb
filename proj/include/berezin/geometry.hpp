#pragma once

// Built-in local Kahler model geometries and their polarized phase data.
// A model provides jets of the potentials phi(x, y) and phi'(x, y) at a
// base point (x0, y0); from these the metric jets G, G^{-1}, the densities
// delta = det G and b = 1/delta, and the Laplace-expansion inputs c, c'
// are assembled. Models are local chart data only.

#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "berezin/jet.hpp"

namespace berezin {

struct KahlerModel {
  enum class Kind { Flat, FubiniStudy, PerturbedFlat };

  Kind kind = Kind::Flat;
  int n = 1;           // complex dimension
  int aux_degree = 0;  // Fubini-Study auxiliary bundle degree m
  Rat lambda = 0;      // PerturbedFlat quartic coefficient

  /// Selection strings: "flat:n", "fs:m", "pflat:p/q".
  static KahlerModel parse(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    KahlerModel m;
    if (head == "flat") {
      m.kind = Kind::Flat;
      m.n = arg.empty() ? 1 : std::stoi(arg);
      if (m.n < 1 || m.n > 8) throw DomainError("flat:n needs 1 <= n <= 8");
    } else if (head == "fs") {
      m.kind = Kind::FubiniStudy;
      m.n = 1;
      m.aux_degree = arg.empty() ? 0 : std::stoi(arg);
      if (m.aux_degree < 0) throw DomainError("fs:m needs m >= 0");
    } else if (head == "pflat") {
      m.kind = Kind::PerturbedFlat;
      m.n = 1;
      if (arg.empty()) throw DomainError("pflat needs a rational coefficient");
      m.lambda = parse_rational(arg);
    } else {
      throw DomainError("unknown model '" + spec + "'");
    }
    return m;
  }

  std::string to_string() const {
    std::ostringstream s;
    switch (kind) {
      case Kind::Flat: s << "flat:" << n; break;
      case Kind::FubiniStudy: s << "fs:" << aux_degree; break;
      case Kind::PerturbedFlat: s << "pflat:" << berezin::to_string(lambda); break;
    }
    return s.str();
  }
};

/// A base point (x0, y0) with complex rational coordinates; on the diagonal
/// y0 = conj(x0).
struct BasePoint {
  std::vector<RatC> x;
  std::vector<RatC> y;

  static BasePoint diagonal(const std::vector<RatC>& z) {
    BasePoint p;
    p.x = z;
    p.y.reserve(z.size());
    for (auto& c : z) p.y.push_back(c.conj());
    return p;
  }
};

enum class Bundle { Line, Aux };

/// phi(base) = affine + log_mult * log(log_arg); the series tail is exact
/// rational whenever the base is rational, even when the constant is not.
template <class K>
struct PotentialJet {
  Jet<K> tail;  // vanishing constant term, layout (x, y)
  RatC affine{Rat(0)};
  RatC log_arg{Rat(1)};
  int log_mult = 0;
};

namespace detail {

inline RatC dot_xy(const std::vector<RatC>& a, const std::vector<RatC>& b) {
  RatC s(Rat(0));
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

inline void check_base(const KahlerModel& m, const BasePoint& p) {
  if (static_cast<int>(p.x.size()) != m.n || static_cast<int>(p.y.size()) != m.n)
    throw DomainError("base point dimension does not match the model");
  if (m.kind == KahlerModel::Kind::FubiniStudy) {
    RatC w = RatC(Rat(1)) + p.x[0] * p.y[0];
    if (w.is_zero())
      throw DomainError("inadmissible base for fs: 1 + x*y vanishes");
  } else if (m.kind == KahlerModel::Kind::PerturbedFlat) {
    Rat w2 = (p.x[0] * p.y[0]).abs2();
    Rat l2 = m.lambda * m.lambda;
    if (!(l2 * w2 * 4 < 1))
      throw DomainError("inadmissible base for pflat: |lambda||x*y| must be < 1/2");
  }
}

inline bool admissible(const KahlerModel& m, const BasePoint& p) {
  try {
    check_base(m, p);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

/// Jet of the polarized potential at x0+X, y0+Y in offsets (X, Y), to total
/// degree `order`, with the constant split off exactly.
template <class K>
PotentialJet<K> potential_jet(const KahlerModel& m, const BasePoint& p, int order,
                              Bundle which = Bundle::Line) {
  check_base(m, p);
  if (order < 0) throw OrderError("potential order must be nonnegative", 0, order);
  auto L = layout_xy(m.n);
  PotentialJet<K> out;
  out.tail = Jet<K>(L, order);

  auto from_q = [](const RatC& c) { return ScalarMode<K>::from_rational(c); };

  switch (m.kind) {
    case KahlerModel::Kind::Flat: {
      if (which == Bundle::Aux) return out;  // trivial L'
      out.affine = detail::dot_xy(p.x, p.y);
      for (int i = 0; i < m.n; ++i) {
        MultiIndex mx(L.vars(), 0), my(L.vars(), 0), mxy(L.vars(), 0);
        mx[L.var(Group::X, i)] = 1;
        my[L.var(Group::Y, i)] = 1;
        mxy[L.var(Group::X, i)] = 1;
        mxy[L.var(Group::Y, i)] = 1;
        if (order >= 1) {
          out.tail.add_coeff(mx, from_q(p.y[i]));
          out.tail.add_coeff(my, from_q(p.x[i]));
        }
        if (order >= 2) out.tail.add_coeff(mxy, K(1));
      }
      return out;
    }
    case KahlerModel::Kind::FubiniStudy: {
      // log(1 + (x0+X)(y0+Y)) = log(1+x0 y0) + log1p(s)
      RatC w0 = RatC(Rat(1)) + p.x[0] * p.y[0];
      Jet<K> s(L, order);
      MultiIndex mx(L.vars(), 0), my(L.vars(), 0), mxy(L.vars(), 0);
      mx[L.var(Group::X, 0)] = 1;
      my[L.var(Group::Y, 0)] = 1;
      mxy[L.var(Group::X, 0)] = 1;
      mxy[L.var(Group::Y, 0)] = 1;
      if (order >= 1) {
        s.add_coeff(mx, from_q(p.y[0] / w0));
        s.add_coeff(my, from_q(p.x[0] / w0));
      }
      if (order >= 2) s.add_coeff(mxy, from_q(RatC(Rat(1)) / w0));
      out.tail = log1p_series(s, order);
      out.log_arg = w0;
      out.log_mult = 1;
      if (which == Bundle::Aux) {
        out.tail.scale(K(m.aux_degree));
        out.log_mult = m.aux_degree;
        if (m.aux_degree == 0) out.log_arg = RatC(Rat(1));
      }
      return out;
    }
    case KahlerModel::Kind::PerturbedFlat: {
      if (which == Bundle::Aux) return out;  // trivial L'
      // phi = x y + lambda (x y)^2 / 2, expanded at the base
      KahlerModel flat;
      flat.kind = KahlerModel::Kind::Flat;
      flat.n = 1;
      PotentialJet<K> lin = potential_jet<K>(flat, p, order, Bundle::Line);
      Jet<K> w = lin.tail;  // x y - x0 y0 as a jet
      RatC w0 = p.x[0] * p.y[0];
      // (w0 + w)^2 = w0^2 + 2 w0 w + w^2
      Jet<K> w2 = mul(w, w, order);
      Jet<K> quad = w2;
      Jet<K> tw = w;
      tw.scale(from_q(w0 * RatC(Rat(2))));
      quad += tw;
      quad.scale(ScalarMode<K>::from_rational(RatC(m.lambda / 2)));
      out.tail = lin.tail + quad;
      out.affine = w0 + RatC(m.lambda / 2) * w0 * w0;
      return out;
    }
  }
  throw DomainError("unreachable model kind");
}

/// Metric and density jets at a base point. All jets live in the (u, v)
/// offset layout per the published contract; builders for the richer
/// (x, y, u, v) form used by the star-product engine are separate.
template <class K>
struct PhaseData {
  KahlerModel model;
  BasePoint base;
  int order = 0;
  std::vector<std::vector<Jet<K>>> metric;      // G_{ij}
  std::vector<std::vector<Jet<K>>> metric_inv;  // G^{ij}
  Jet<K> density;                               // delta = det G
  Jet<K> density_inv;                           // b = 1/delta
  Jet<K> c;                                     // phase offset jet
  Jet<K> cprime;                                // e^{-psi'} delta(x+u, y+v)
};

namespace detail {

/// det of an n x n matrix of jets (expansion by minors; n is tiny).
template <class K>
Jet<K> jet_det(const std::vector<std::vector<Jet<K>>>& m, int cap) {
  int n = static_cast<int>(m.size());
  if (n == 1) return m[0][0].truncated(cap);
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) cols[i] = i;
  Jet<K> acc(m[0][0].layout(), cap);
  // Leibniz over permutations; fine for n <= 8
  std::vector<int> perm(cols);
  std::function<void(int, int)> rec = [&](int row, int sign) {
    if (row == n) {
      Jet<K> term = Jet<K>::constant(m[0][0].layout(), cap, K(sign));
      for (int i = 0; i < n; ++i) term = mul(term, m[i][perm[i]], cap);
      acc += term;
      return;
    }
    for (int i = row; i < n; ++i) {
      std::swap(perm[row], perm[i]);
      rec(row + 1, i == row ? sign : -sign);
      std::swap(perm[row], perm[i]);
    }
  };
  rec(0, 1);
  return acc;
}

/// Inverse of an n x n jet matrix with invertible constant part.
template <class K>
std::vector<std::vector<Jet<K>>> jet_matrix_inverse(
    const std::vector<std::vector<Jet<K>>>& m, int cap) {
  int n = static_cast<int>(m.size());
  if (n == 1) {
    return {{reciprocal(m[0][0], cap)}};
  }
  // adjugate / det
  Jet<K> det = jet_det(m, cap);
  Jet<K> det_inv = reciprocal(det, cap);
  std::vector<std::vector<Jet<K>>> inv(n, std::vector<Jet<K>>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<std::vector<Jet<K>>> minor;
      for (int r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<Jet<K>> row;
        for (int c2 = 0; c2 < n; ++c2) {
          if (c2 == j) continue;
          row.push_back(m[r][c2]);
        }
        minor.push_back(std::move(row));
      }
      Jet<K> cof = jet_det(minor, cap);
      if ((i + j) % 2) cof.scale(K(-1));
      inv[j][i] = mul(cof, det_inv, cap);
    }
  return inv;
}

}  // namespace detail

/// Four-variable phase jets at a base point: everything the Laplace
/// expansion engine needs. `uv_order` caps the u and v degrees per variable
/// group; `xy_order` caps the joint (x,y) degree.
template <class K>
struct PhaseJets {
  VariableLayout layout4;  // (x, y, u, v)
  int uv_order = 0;
  int xy_order = 0;
  Jet<K> c;
  Jet<K> cprime;
  Jet<K> density_xy;   // delta(x, y), no (u,v) dependence
  Jet<K> b_xy;         // 1/delta
  std::vector<std::vector<Jet<K>>> metric_xy;
  std::vector<std::vector<Jet<K>>> metric_inv_xy;
};

template <class K>
PhaseJets<K> make_phase_jets(const KahlerModel& m, const BasePoint& p,
                             int uv_order, int xy_order) {
  check_base(m, p);
  const int n = m.n;
  auto L2 = layout_xy(n);
  auto L4 = layout_xyuv(n);
  const int pot_order = 2 * uv_order + xy_order;

  GroupCaps box;
  box.xy = xy_order;
  box[Group::U] = uv_order;
  box[Group::V] = uv_order;
  GroupCaps vbox;  // intermediate: only the v-direction is final
  vbox[Group::V] = uv_order;

  PotentialJet<K> phi = potential_jet<K>(m, p, pot_order + 2, Bundle::Line);
  PotentialJet<K> phi_aux = potential_jet<K>(m, p, pot_order, Bundle::Aux);

  PhaseJets<K> out;
  out.layout4 = L4;
  out.uv_order = uv_order;
  out.xy_order = xy_order;

  // metric jets in (x, y)
  out.metric_xy.assign(n, std::vector<Jet<K>>(n, Jet<K>(L2, xy_order)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.metric_xy[i][j] =
          derive(derive(phi.tail, Group::X, i), Group::Y, j).truncated(xy_order);

  K g0 = out.metric_xy[0][0].constant_term();
  if (n == 1 && g0.is_zero())
    throw DomainError("metric is singular at the base point");
  if constexpr (!ScalarMode<K>::exact) {
    double gmax = 0;
    for (auto& row : out.metric_xy)
      for (auto& e : row) gmax = std::max(gmax, max_abs_coeff(e));
    double g00 = abs_double(detail::jet_det(out.metric_xy, 0).constant_term());
    if (g00 == 0 || gmax / g00 > 1e12)
      throw DomainError("metric is numerically singular at the base point");
  }

  out.density_xy = detail::jet_det(out.metric_xy, xy_order);
  if (out.density_xy.constant_term().is_zero())
    throw DomainError("metric determinant vanishes at the base point");
  out.b_xy = reciprocal(out.density_xy, xy_order);
  out.metric_inv_xy = detail::jet_matrix_inverse(out.metric_xy, xy_order);

  const int cap4 = 2 * uv_order + xy_order;

  // four-term phase combination; shift before truncating since the shift
  // turns high (x,y)-degrees into admissible (u,v)-degrees
  Jet<K> phi4 = embed(phi.tail, L4, cap4);
  Jet<K> phi_xv = shift_group(phi4, Group::Y, Group::V, box);   // phi(x, y+v)
  Jet<K> phi_ux = shift_group(phi4, Group::X, Group::U, box);   // phi(x+u, y)
  Jet<K> phi_uv = shift_group(shift_group(phi4, Group::Y, Group::V, vbox),
                              Group::X, Group::U, box);         // phi(x+u, y+v)

  Jet<K> c4 = phi_xv + phi_ux - phi4.truncated(cap4, box) - phi_uv;
  // + sum_ij G_ij(x,y) u_i v_j
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet<K> g4 = embed(out.metric_xy[i][j], L4, cap4);
      Jet<K> uivj = mul(Jet<K>::variable(L4, cap4, Group::U, i),
                        Jet<K>::variable(L4, cap4, Group::V, j), cap4);
      c4 += mul(g4, uivj, cap4, box);
    }
  out.c = c4.truncated(cap4, box);

  // c' = exp(-psi') * delta(x+u, y+v)
  Jet<K> aux4 = embed(phi_aux.tail, L4, cap4);
  Jet<K> aux_xv = shift_group(aux4, Group::Y, Group::V, box);
  Jet<K> aux_ux = shift_group(aux4, Group::X, Group::U, box);
  Jet<K> aux_uv = shift_group(shift_group(aux4, Group::Y, Group::V, vbox),
                              Group::X, Group::U, box);
  Jet<K> psi_aux = aux4.truncated(cap4, box) + aux_uv - aux_xv - aux_ux;
  // delta(x+u, y+v) needs the density to xy-order cap4 before the shift
  Jet<K> delta_full = detail::jet_det(
      [&] {
        std::vector<std::vector<Jet<K>>> g(n, std::vector<Jet<K>>(n));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            g[i][j] = derive(derive(phi.tail, Group::X, i), Group::Y, j)
                          .truncated(cap4);
        return g;
      }(),
      cap4);
  Jet<K> delta4 = embed(delta_full, L4, cap4);
  Jet<K> delta_shift = shift_group(
      shift_group(delta4, Group::Y, Group::V, vbox), Group::X, Group::U, box);
  psi_aux.scale(K(-1));
  out.cprime = mul(exp_series(psi_aux, cap4), delta_shift, cap4, box);
  return out;
}

/// Published (u,v)-jet form of the phase data at a base point.
template <class K>
PhaseData<K> metric_data(const KahlerModel& m, const BasePoint& p, int order) {
  PhaseJets<K> ph = make_phase_jets<K>(m, p, order, 0);
  PhaseData<K> out;
  out.model = m;
  out.base = p;
  out.order = order;
  const int n = m.n;

  auto to_uv = [&](const Jet<K>& j4) {
    // drop the (x, y) directions (they are capped at 0), keep (u, v)
    Jet<K> r(layout_uv(n), order);
    const auto& L4 = j4.layout();
    for (auto& [mi, c] : j4.terms()) {
      MultiIndex m2(2 * n, 0);
      for (int i = 0; i < n; ++i) {
        m2[i] = mi[L4.var(Group::U, i)];
        m2[n + i] = mi[L4.var(Group::V, i)];
      }
      if (order_of(m2) <= order) r.add_coeff(m2, c);
    }
    return r;
  };

  // metric jets as (u, v)-jets of G(x0+u, y0+v): recompute from a shifted
  // potential rather than reinterpreting the (x, y) jets
  PotentialJet<K> phi = potential_jet<K>(m, p, order + 2, Bundle::Line);
  out.metric.assign(n, std::vector<Jet<K>>(n, Jet<K>(layout_uv(n), order)));
  std::vector<std::vector<Jet<K>>> guv(n, std::vector<Jet<K>>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet<K> g = derive(derive(phi.tail, Group::X, i), Group::Y, j).truncated(order);
      // rename (x, y) -> (u, v)
      Jet<K> g_uv(layout_uv(n), order);
      for (auto& [mi, c] : g.terms()) g_uv.add_coeff(mi, c);
      out.metric[i][j] = g_uv;
      guv[i][j] = g_uv;
    }
  out.density = detail::jet_det(guv, order);
  if (out.density.constant_term().is_zero())
    throw DomainError("metric determinant vanishes at the base point");
  out.density_inv = reciprocal(out.density, order);
  out.metric_inv = detail::jet_matrix_inverse(guv, order);
  out.c = to_uv(ph.c);
  out.cprime = to_uv(ph.cprime);
  return out;
}

template <class K>
Jet<K> c_jet(const KahlerModel& m, const BasePoint& p, int order) {
  return metric_data<K>(m, p, order).c;
}

template <class K>
Jet<K> cprime_jet(const KahlerModel& m, const BasePoint& p, int order) {
  return metric_data<K>(m, p, order).cprime;
}

/// log |E(z, w)| = Re phi(z, conj w) - phi(z)/2 - phi(w)/2 for models with a
/// global potential formula. Returns 0 on the diagonal, negative off it,
/// -inf where E vanishes.
inline double log_section_norm(const KahlerModel& m, const std::vector<RatC>& z,
                               const std::vector<RatC>& w) {
  auto cx = [](const RatC& q) {
    return std::complex<double>(to_double(q.re), to_double(q.im));
  };
  std::vector<std::complex<double>> zz, ww;
  for (auto& c : z) zz.push_back(cx(c));
  for (auto& c : w) ww.push_back(cx(c));

  switch (m.kind) {
    case KahlerModel::Kind::Flat: {
      std::complex<double> mixed = 0;
      double az = 0, aw = 0;
      for (int i = 0; i < m.n; ++i) {
        mixed += zz[i] * std::conj(ww[i]);
        az += std::norm(zz[i]);
        aw += std::norm(ww[i]);
      }
      return mixed.real() - az / 2 - aw / 2;
    }
    case KahlerModel::Kind::FubiniStudy: {
      std::complex<double> mixed = 1.0 + zz[0] * std::conj(ww[0]);
      double az = 1 + std::norm(zz[0]), aw = 1 + std::norm(ww[0]);
      if (mixed == std::complex<double>(0))
        return -std::numeric_limits<double>::infinity();
      return std::log(std::abs(mixed)) - std::log(az) / 2 - std::log(aw) / 2;
    }
    case KahlerModel::Kind::PerturbedFlat:
      throw DomainError("log_section_norm needs a model with a global potential");
  }
  throw DomainError("unreachable model kind");
}

}  // namespace berezin
