#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "berezin/contravariant.hpp"
#include "berezin/symbols.hpp"

using namespace berezin;

namespace {

RatC q(long n, long d = 1) { return RatC(rat(n, d)); }

BasePoint pt(long xn, long xd, long yn, long yd) {
  BasePoint p;
  p.x = {q(xn, xd)};
  p.y = {q(yn, yd)};
  return p;
}

BasePoint origin() { return pt(0, 1, 0, 1); }

RatJet random_xy_jet(int deg, std::mt19937& rng, int cap) {
  std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
  RatJet j(layout_xy(1), cap);
  for (int a = 0; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b)
      j.add_coeff({static_cast<uint16_t>(a), static_cast<uint16_t>(b)},
                  q(num(rng), den(rng)));
  return j;
}

// holomorphic extension of t/(1+t) at the origin: xy/(1+xy)
RatJet h_jet(int cap) {
  auto L = layout_xy(1);
  RatJet xy = mul(RatJet::variable(L, cap, Group::X),
                  RatJet::variable(L, cap, Group::Y), cap);
  RatJet den = RatJet::constant(L, cap, q(1)) + xy;
  return mul(xy, reciprocal(den, cap), cap);
}

}  // namespace

TEST_CASE("level zero is the identity") {
  std::mt19937 rng(99);
  for (auto spec : {"flat:1", "fs:0", "pflat:1/10"}) {
    auto m = KahlerModel::parse(spec);
    auto base = spec[0] == 'p' ? origin() : pt(1, 2, 1, 2);
    CovariantMap<RatC> map(m, base, 0, 3);
    for (int t = 0; t < 3; ++t) {
      RatJet f = random_xy_jet(3, rng, 4);
      CHECK(map.apply_term(f, 0, 3) == f.truncated(3));
    }
  }
}

TEST_CASE("flat closed form: B_l = d^l dbar^l / l!") {
  auto m = KahlerModel::parse("flat:1");
  std::mt19937 rng(123);
  CovariantMap<RatC> map(m, origin(), 4, 0);
  for (int l = 0; l <= 4; ++l) {
    RatJet f = random_xy_jet(2 * l + 2, rng, 2 * l + 2);
    RatC got = map.apply_term(f, l, 0).constant_term();
    RatJet d = f;
    for (int i = 0; i < l; ++i)
      d = derive(derive(d, Group::X), Group::Y);
    RatC want = d.constant_term() * RatC(Rat(1) / factorial(l));
    CHECK(got == want);
  }
}

TEST_CASE("fs(0) pinned values") {
  auto m = KahlerModel::parse("fs:0");

  SUBCASE("B_1(1)(0) = 1") {
    RatJet one = RatJet::constant(layout_xy(1), 4, q(1));
    CHECK(covariant_term_value(m, origin(), one, 1) == q(1));
  }

  SUBCASE("B_l(h)(0) = 0, 1, -1, 2 against the exact kernel of the multiplier") {
    CovariantMap<RatC> map(m, origin(), 3, 0);
    RatJet h = h_jet(10);
    std::vector<RatC> want = {q(0), q(1), q(-1), q(2)};
    for (int l = 0; l <= 3; ++l)
      CHECK(map.apply_term(h, l, 0).constant_term() == want[static_cast<size_t>(l)]);
  }
}

TEST_CASE("covariant map on prefixes") {
  SUBCASE("B(1) = rho on fs models") {
    for (auto spec : {"fs:0", "fs:2"}) {
      auto m = KahlerModel::parse(spec);
      auto F = SymbolPrefix<RatC>::constant(layout_xy(1), 8, q(1));
      auto G = to_covariant(m, pt(1, 2, 1, 2), F, 3);
      auto rho = bergman_symbol<RatC>(m, pt(1, 2, 1, 2), 3, 0);
      for (int c = 0; c <= 3; ++c)
        CHECK(G.coeff[c].constant_term() == rho.values()[static_cast<size_t>(c)]);
    }
  }

  SUBCASE("flat: B(z zbar) = z zbar + hbar at the origin") {
    auto m = KahlerModel::parse("flat:1");
    auto L = layout_xy(1);
    RatJet zz = mul(RatJet::variable(L, 6, Group::X),
                    RatJet::variable(L, 6, Group::Y), 6);
    auto G = to_covariant(m, origin(), SymbolPrefix<RatC>({zz}), 2);
    CHECK(G.coeff[0].constant_term() == q(0));
    CHECK(G.coeff[1].constant_term() == q(1));
    CHECK(G.coeff[2].constant_term() == q(0));
  }

  SUBCASE("level zero of the output always copies the input") {
    std::mt19937 rng(7);
    auto m = KahlerModel::parse("pflat:1/10");
    SymbolPrefix<RatC> F({random_xy_jet(3, rng, 8), random_xy_jet(2, rng, 8)});
    auto G = to_covariant(m, origin(), F, 2);
    CHECK(G.coeff[0] == F.coeff[0].truncated(G.coeff[0].cap()));
  }
}

TEST_CASE("inverse map") {
  SUBCASE("B^{-1}(B(F)) = F to fifth order, exact") {
    std::mt19937 rng(2718);
    for (auto spec : {"fs:0", "pflat:1/10"}) {
      auto m = KahlerModel::parse(spec);
      auto base = spec[0] == 'p' ? origin() : pt(1, 2, 1, 2);
      int cap = 4;
      SymbolPrefix<RatC> F({random_xy_jet(2, rng, 9), random_xy_jet(2, rng, 9)});
      auto BF = to_covariant(m, base, F, cap);
      auto back = from_covariant(m, base, BF, cap);
      for (int c = 0; c <= cap; ++c) {
        int common = std::min(back.coeff[c].cap(), 1);
        RatJet want = c <= F.levels() ? F.at(c).truncated(common)
                                      : RatJet(layout_xy(1), common);
        CHECK(back.coeff[c].truncated(common) == want);
      }
    }
  }

  SUBCASE("B^{-1}(rho) = 1 on fs(0)") {
    auto m = KahlerModel::parse("fs:0");
    auto base = pt(1, 2, 1, 2);
    auto rho = bergman_symbol<RatC>(m, base, 3, 7);
    auto back = from_covariant(m, base, SymbolPrefix<RatC>(rho.rho), 3);
    CHECK(back.coeff[0].constant_term() == q(1));
    for (int c = 1; c <= 3; ++c) CHECK(back.coeff[c].is_zero());
  }

  SUBCASE("flat: B^{-1}(z zbar) = z zbar - hbar at the origin") {
    auto m = KahlerModel::parse("flat:1");
    auto L = layout_xy(1);
    RatJet zz = mul(RatJet::variable(L, 6, Group::X),
                    RatJet::variable(L, 6, Group::Y), 6);
    auto G = from_covariant(m, origin(), SymbolPrefix<RatC>({zz}), 2);
    CHECK(G.coeff[1].constant_term() == q(-1));
    CHECK(G.coeff[2].constant_term() == q(0));
  }
}

TEST_CASE("analyticity preservation on the perturbed model") {
  // the forward and inverse maps keep factorial-growth constants of a
  // symbol prefix bounded; fitted on the max-coefficient proxy norms
  auto m = KahlerModel::parse("pflat:1/10");
  auto L = layout_xy(1);
  int cap = 8;
  // F = single analytic coefficient (a polynomial), deep enough jets
  std::mt19937 rng(31337);
  SymbolPrefix<RatC> F({random_xy_jet(2, rng, 2 * cap + 2)});
  auto BF = to_covariant(m, origin(), F, cap);
  auto BinvF = from_covariant(m, origin(), F, cap);

  auto fitted = [](const SymbolPrefix<RatC>& S) {
    std::vector<double> norms;
    for (auto& c : S.coeff) norms.push_back(max_abs_coeff(c));
    return fit_factorial_growth(NormedSymbol::from_norms(norms));
  };
  double c_in = fitted(F);
  double c_fwd = fitted(BF);
  double c_inv = fitted(BinvF);
  CHECK(std::isfinite(c_fwd));
  CHECK(std::isfinite(c_inv));
  // bounded: within a fixed factor of the input constant on this model
  CHECK(c_fwd <= 4 * c_in + 4);
  CHECK(c_inv <= 4 * c_in + 4);
}

TEST_CASE("coefficient tables") {
  SUBCASE("flat forward table is the scaled diagonal") {
    auto m = KahlerModel::parse("flat:1");
    CovariantMap<RatC> map(m, origin(), 3, 0);
    auto table = covariant_term_coefficients(map, 3, false);
    for (int l = 0; l <= 3; ++l) {
      MultiIndex d{static_cast<uint16_t>(l)};
      CHECK(table[{l, d, d}] == RatC(Rat(1) / factorial(l)));
    }
    // nothing off the diagonal
    for (auto& [key, v] : table) {
      auto& [l, a, b] = key;
      CHECK(a == b);
      CHECK(order_of(a) == l);
    }
  }

  SUBCASE("flat inverse table alternates in sign") {
    auto m = KahlerModel::parse("flat:1");
    CovariantMap<RatC> map(m, origin(), 3, 4);
    auto table = covariant_term_coefficients(map, 3, true);
    for (int l = 0; l <= 3; ++l) {
      MultiIndex d{static_cast<uint16_t>(l)};
      RatC want = RatC(Rat((l % 2) ? -1 : 1) / factorial(l));
      CHECK(table[{l, d, d}] == want);
    }
  }

  SUBCASE("level zero entry is 1 everywhere") {
    for (auto spec : {"fs:0", "pflat:1/10"}) {
      auto m = KahlerModel::parse(spec);
      CovariantMap<RatC> map(m, origin(), 2, 0);
      auto table = covariant_term_coefficients(map, 2, false);
      CHECK(table[{0, {0}, {0}}] == q(1));
    }
  }
}
