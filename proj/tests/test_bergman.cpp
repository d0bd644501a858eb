#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "berezin/bergman.hpp"

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

}  // namespace

TEST_CASE("flat model: the symbol is exactly 1") {
  auto m = KahlerModel::parse("flat:1");
  auto sym = bergman_symbol<RatC>(m, pt(1, 2, 1, 3), 5, 2);
  auto v = sym.values();
  REQUIRE(v.size() == 6);
  CHECK(v[0] == q(1));
  for (size_t l = 1; l < v.size(); ++l) {
    CHECK(v[l] == q(0));
    CHECK(sym.rho[l].is_zero());
  }
}

TEST_CASE("fs models terminate after the subleading coefficient") {
  SUBCASE("fs(0) at the origin gives (1,1,0,0,0,0)") {
    auto m = KahlerModel::parse("fs:0");
    auto v = bergman_symbol<RatC>(m, origin(), 5, 0).values();
    CHECK(v[0] == q(1));
    CHECK(v[1] == q(1));
    for (size_t l = 2; l < v.size(); ++l) CHECK(v[l] == q(0));
  }

  SUBCASE("fs(0) away from the origin gives the same constants") {
    auto m = KahlerModel::parse("fs:0");
    auto sym = bergman_symbol<RatC>(m, pt(1, 2, 1, 2), 4, 1);
    auto v = sym.values();
    CHECK(v[0] == q(1));
    CHECK(v[1] == q(1));
    CHECK(v[2] == q(0));
    CHECK(v[3] == q(0));
    CHECK(v[4] == q(0));
    // the subleading coefficient is the constant function 1
    CHECK(sym.rho[1] ==
          RatJet::constant(layout_xy(1), sym.rho[1].cap(), q(1)));
  }

  SUBCASE("fs(1) and fs(2): rho_1 = m+1") {
    for (int aux = 1; aux <= 2; ++aux) {
      auto m = KahlerModel::parse("fs:" + std::to_string(aux));
      auto v = bergman_symbol<RatC>(m, origin(), 3, 0).values();
      CHECK(v[0] == q(1));
      CHECK(v[1] == q(aux + 1));
      CHECK(v[2] == q(0));
      CHECK(v[3] == q(0));
    }
  }
}

TEST_CASE("composition sum reproduces the linear recursion") {
  SUBCASE("term count is 2^(m-1)") {
    for (int mth = 1; mth <= 8; ++mth) {
      CHECK(static_cast<long>(compositions(mth).size()) == composition_count(mth));
    }
  }

  SUBCASE("fs(0) agreement to five coefficients, exact") {
    auto m = KahlerModel::parse("fs:0");
    auto a = bergman_symbol<RatC>(m, origin(), 5, 0);
    auto b = bergman_symbol_by_compositions<RatC>(m, origin(), 5, 0);
    for (size_t l = 0; l < a.rho.size(); ++l) {
      int common = std::min(a.rho[l].cap(), b.rho[l].cap());
      CHECK(a.rho[l].truncated(common) == b.rho[l].truncated(common));
    }
  }

  SUBCASE("pflat agreement to four coefficients, exact") {
    auto m = KahlerModel::parse("pflat:1/10");
    auto a = bergman_symbol<RatC>(m, origin(), 4, 1);
    auto b = bergman_symbol_by_compositions<RatC>(m, origin(), 4, 1);
    for (size_t l = 0; l < a.rho.size(); ++l) {
      int common = std::min(a.rho[l].cap(), b.rho[l].cap());
      CHECK(a.rho[l].truncated(common) == b.rho[l].truncated(common));
    }
  }

  SUBCASE("flat: every composition term vanishes") {
    auto m = KahlerModel::parse("flat:1");
    auto b = bergman_symbol_by_compositions<RatC>(m, pt(1, 1, 2, 1), 4, 0);
    for (size_t l = 1; l < b.rho.size(); ++l) CHECK(b.rho[l].is_zero());
  }

  SUBCASE("guard") {
    auto m = KahlerModel::parse("fs:0");
    CHECK_THROWS_AS(bergman_symbol_by_compositions<RatC>(m, origin(), 9),
                    DomainError);
  }
}

TEST_CASE("unit property of the symbol") {
  std::mt19937 rng(515);
  for (auto spec : {"fs:0", "pflat:1/10"}) {
    auto m = KahlerModel::parse(spec);
    auto base = spec[0] == 'f' ? pt(1, 2, 1, 2) : origin();
    int cap = 3;
    auto sym = bergman_symbol<RatC>(m, base, cap, 3 * cap + 2);
    SymbolPrefix<RatC> rho(sym.rho);
    SymbolPrefix<RatC> F({random_xy_jet(3, rng, 3 * cap + 2),
                          random_xy_jet(2, rng, 3 * cap + 2)});
    auto left = star_product(m, base, rho, F, cap);
    auto right = star_product(m, base, F, rho, cap);
    for (int c = 0; c <= cap; ++c) {
      int common = std::min({left.coeff[c].cap(), right.coeff[c].cap(), 2});
      RatJet want = c <= F.levels() ? F.at(c).truncated(common)
                                    : RatJet(layout_xy(1), common);
      CHECK(left.coeff[c].truncated(common) == want);
      CHECK(right.coeff[c].truncated(common) == want);
    }
  }
}

TEST_CASE("kernel partial sums") {
  SUBCASE("fs(0), k = 10, eps = 1/2 gives 11/(2 pi)") {
    auto m = KahlerModel::parse("fs:0");
    auto s = bergman_partial_sum<RatC>(m, origin(), rat(1, 2), 10);
    CHECK(s.scaled == q(11));
    CHECK(s.value == doctest::Approx(11 / (2 * M_PI)).epsilon(1e-12));
    CHECK(s.terms == 6);
  }

  SUBCASE("flat: k/(2 pi) for several k") {
    auto m = KahlerModel::parse("flat:1");
    for (int k : {1, 4, 9}) {
      auto s = bergman_partial_sum<RatC>(m, pt(1, 2, 1, 2), rat(1, 2), k);
      CHECK(s.scaled == q(k));
    }
  }

  SUBCASE("fs(2), k = 10 gives 13/(2 pi)") {
    auto m = KahlerModel::parse("fs:2");
    auto s = bergman_partial_sum<RatC>(m, origin(), rat(1, 2), 10);
    CHECK(s.scaled == q(13));
  }

  SUBCASE("eps beyond the fitted growth is rejected") {
    auto m = KahlerModel::parse("fs:0");
    CHECK_THROWS_AS(bergman_partial_sum<RatC>(m, origin(), rat(3, 2), 10),
                    DomainError);
  }
}

TEST_CASE("pflat coefficients are nontrivial and reproducible") {
  auto m = KahlerModel::parse("pflat:1/10");
  auto v1 = bergman_symbol<RatC>(m, origin(), 4, 0).values();
  auto v2 = bergman_symbol<RatC>(m, origin(), 4, 0).values();
  for (size_t l = 0; l < v1.size(); ++l) CHECK(v1[l] == v2[l]);
  CHECK(v1[0] == q(1));
  bool any_nonzero = false;
  for (size_t l = 1; l < v1.size(); ++l) any_nonzero |= !v1[l].is_zero();
  CHECK(any_nonzero);
}
